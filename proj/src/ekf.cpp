#include "dragobs/ekf.hpp"

#include <cmath>
#include <stdexcept>

#include "dragobs/integrate.hpp"

namespace dragobs {

namespace {

Vec5 design_rhs(const Vec5& x, const Vec3& gyro, double c, double g) {
  const double p = gyro.x(), q = gyro.y(), r = gyro.z();
  Vec5 dx;
  dx[0] = g * x[2] - c * x[0];
  dx[1] = g * x[3] - c * x[1];
  dx[2] = r * x[3] - q * x[4];
  dx[3] = p * x[4] - r * x[2];
  dx[4] = q * x[2] - p * x[3];
  return dx;
}

Mat5 design_jacobian(const Vec3& gyro, double c, double g) {
  const double p = gyro.x(), q = gyro.y(), r = gyro.z();
  Mat5 F = Mat5::Zero();
  F(0, 0) = -c;
  F(0, 2) = g;
  F(1, 1) = -c;
  F(1, 3) = g;
  F(2, 3) = r;
  F(2, 4) = -q;
  F(3, 2) = -r;
  F(3, 4) = p;
  F(4, 2) = q;
  F(4, 3) = -p;
  return F;
}

}  // namespace

EkfConfig default_ekf_config(const SensorConfig& sensors) {
  EkfConfig cfg;
  const double r = std::max(filtered_noise_variance(sensors), 1e-8);
  cfg.R = Eigen::Matrix2d::Identity() * r;
  // Velocity process noise absorbs the neglected Coriolis terms; the eta
  // channels track the gyro noise level. Values from a coarse grid search
  // (decades 1e-6..1e0) on noisy, biased runs.
  cfg.Q = Vec5(1e-2, 1e-2, 1e-5, 1e-5, 1e-5).asDiagonal();
  cfg.P0 = Vec5(4.0, 4.0, 0.25, 0.25, 0.25).asDiagonal();
  return cfg;
}

EkfState ekf_predict(const EkfState& s, const Vec3& gyro, double c, double g,
                     double dt, const Mat5& Q) {
  if (!(dt > 0.0)) throw std::invalid_argument("ekf_predict: dt must be > 0");

  EkfState out;
  out.mean = detail::rk4_step<5>(
      s.mean, 0.0, dt,
      [&](double, const Vec5& x) { return design_rhs(x, gyro, c, g); });
  if (!out.mean.allFinite())
    throw std::runtime_error("ekf_predict: non-finite mean");

  const Mat5 phi = Mat5::Identity() + design_jacobian(gyro, c, g) * dt;
  out.covariance = phi * s.covariance * phi.transpose() + Q * dt;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

EkfState ekf_update(const EkfState& s, const Eigen::Vector2d& accel_xy,
                    double c, const Eigen::Matrix2d& R) {
  Eigen::Matrix<double, 2, 5> H = Eigen::Matrix<double, 2, 5>::Zero();
  H(0, 0) = -c;
  H(1, 1) = -c;

  const Eigen::Matrix2d S = H * s.covariance * H.transpose() + R;
  const Eigen::LDLT<Eigen::Matrix2d> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(S.determinant() > 1e-300))
    throw std::runtime_error("ekf_update: innovation covariance not invertible");

  const Eigen::Matrix<double, 5, 2> K =
      ldlt.solve(H * s.covariance).transpose();
  const Eigen::Vector2d innovation =
      accel_xy - Eigen::Vector2d(-c * s.mean[0], -c * s.mean[1]);

  EkfState out;
  out.mean = s.mean + K * innovation;

  const Mat5 ikh = Mat5::Identity() - K * H;
  out.covariance = ikh * s.covariance * ikh.transpose() + K * R * K.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

  const double n = out.mean.tail<3>().norm();
  if (!(n > 1e-12))
    throw std::runtime_error("ekf_update: eta collapsed to zero norm");
  out.mean.tail<3>() /= n;
  return out;
}

}  // namespace dragobs
