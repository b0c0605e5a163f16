#include "dragobs/observer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dragobs/integrate.hpp"

namespace dragobs {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 pack(const ObserverState& o) {
  Vec5 x;
  x << o.u_hat, o.v_hat, o.eta_hat;
  return x;
}

ObserverState unpack(const Vec5& x) {
  ObserverState o;
  o.u_hat = x[0];
  o.v_hat = x[1];
  o.eta_hat = x.tail<3>();
  return o;
}

}  // namespace

double saturate(double x, double epsilon) {
  const double limit = 1.0 - epsilon * epsilon;
  if (std::abs(x) <= limit) return x;
  return std::copysign(limit, x);
}

double constraint_error(double x1, double x2, double x3, double epsilon) {
  const double sq = x1 * x1 + x2 * x2;
  const double root = std::sqrt(1.0 - saturate(sq, epsilon));
  return (x3 - root) / (sq + 1.0 - epsilon * epsilon);
}

ObserverDerivative observer_derivative(const ObserverState& o,
                                       const ImuSample& imu, double c,
                                       const Gains& gains) {
  if (!(c >= gains.c_l) || !(gains.c_l > 0.0))
    throw std::domain_error("observer_derivative: c < c_l (division guard)");
  if (!o.finite()) throw std::invalid_argument("observer_derivative: non-finite state");

  const double g = gains.g;
  const double p = imu.omega.x();
  const double q = imu.omega.y();
  const double r = imu.omega.z();

  // Velocity innovations; with ideal sensors ax/c = -u, so iu = u_hat - u.
  const double iu = o.u_hat + imu.a.x() / c;
  const double iv = o.v_hat + imu.a.y() / c;

  const double e1 = o.eta_hat.x();
  const double e2 = o.eta_hat.y();
  const double e3 = o.eta_hat.z();

  ObserverDerivative d;
  d.du_hat = g * e1 - c * o.u_hat - (gains.ku + gains.k1) * iu;
  d.dv_hat = g * e2 - c * o.v_hat - (gains.kv + gains.k2) * iv;
  d.deta_hat.x() = r * e2 - q * e3 - gains.k1 * gains.ku / g * iu - r * gains.k2 / g * iv;
  d.deta_hat.y() = p * e3 - r * e1 + r * gains.k1 / g * iu - gains.k2 * gains.kv / g * iv;
  d.deta_hat.z() = q * e1 - p * e2 - q * gains.k1 / g * iu + p * gains.k2 / g * iv -
                   gains.k3 * constraint_error(e1 - gains.k1 / g * iu,
                                               e2 - gains.k2 / g * iv, e3,
                                               gains.epsilon);
  return d;
}

ObserverState observer_step(const ObserverState& o, const ImuSample& imu,
                            const ObserverConfig& cfg, double c) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("observer_step: dt must be > 0");

  auto f = [&](double, const Vec5& x) -> Vec5 {
    const ObserverDerivative d = observer_derivative(unpack(x), imu, c, cfg.gains);
    Vec5 dx;
    dx << d.du_hat, d.dv_hat, d.deta_hat;
    return dx;
  };

  const Vec5 next = cfg.integration == ObserverIntegrator::rk4
                        ? detail::rk4_step<5>(pack(o), imu.t, cfg.dt, f)
                        : detail::euler_step<5>(pack(o), imu.t, cfg.dt, f);

  static const char* kFields[] = {"u_hat", "v_hat", "eta1_hat", "eta2_hat", "eta3_hat"};
  for (int i = 0; i < 5; ++i) {
    if (!std::isfinite(next[i]))
      throw std::runtime_error(std::string("observer_step: ") + kFields[i] +
                               " diverged");
  }
  return unpack(next);
}

Angles extract_angles(const Vec3& eta_hat) {
  const double n = eta_hat.norm();
  if (!(n > 0.0)) throw std::domain_error("extract_angles: zero-norm eta");
  if (!(eta_hat.z() > 0.0))
    throw std::domain_error("extract_angles: eta3 <= 0, outside admissible cap");

  Angles a;
  a.theta = -std::asin(std::clamp(eta_hat.x() / n, -1.0, 1.0));
  a.phi = std::atan2(eta_hat.y(), eta_hat.z());
  return a;
}

std::vector<Vec3> observability_oracle(const std::vector<double>& u,
                                       const std::vector<double>& v,
                                       const std::vector<double>& c, double g,
                                       double dt) {
  const std::size_t n = u.size();
  if (v.size() != n || c.size() != n)
    throw std::invalid_argument("observability_oracle: stream lengths differ");
  if (n < 3) throw std::invalid_argument("observability_oracle: need >= 3 samples");
  if (!(dt > 0.0) || !(g > 0.0))
    throw std::invalid_argument("observability_oracle: dt and g must be > 0");

  // Second-order finite differences, central in the interior.
  auto ddt = [&](const std::vector<double>& x, std::size_t k) {
    if (k == 0) return (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
    if (k == n - 1) return (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    return (x[k + 1] - x[k - 1]) / (2.0 * dt);
  };

  std::vector<Vec3> eta(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e1 = (ddt(u, k) + c[k] * u[k]) / g;
    const double e2 = (ddt(v, k) + c[k] * v[k]) / g;
    const double rad = 1.0 - e1 * e1 - e2 * e2;
    if (rad < 0.0)
      throw std::domain_error(
          "observability_oracle: 1 - eta1^2 - eta2^2 < 0 at sample " +
          std::to_string(k));
    eta[k] = Vec3(e1, e2, std::sqrt(rad));
  }
  return eta;
}

}  // namespace dragobs
