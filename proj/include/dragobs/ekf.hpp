#pragma once

#include "dragobs/sensors.hpp"
#include "dragobs/types.hpp"

namespace dragobs {

using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// Continuous-discrete EKF on the simplified design model, with state
// (u, v, eta1, eta2, eta3). Generic baseline for comparison with the
// nonlinear observer; not a reproduction of any published filter.
struct EkfState {
  Vec5 mean = (Vec5() << 0, 0, 0, 0, 1).finished();
  Mat5 covariance = Mat5::Identity();
};

struct EkfConfig {
  Mat5 Q = Mat5::Identity() * 1e-4;       // process noise PSD [unit^2/s]
  Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * 1e-2;  // accel noise [m^2/s^4]
  Mat5 P0 = Mat5::Identity();
};

// Q/R derived from the sensor config: R is the stationary variance of the
// filtered accelerometer noise (floored to stay invertible); Q was fixed by
// a grid search on noisy biased runs, see docs.
EkfConfig default_ekf_config(const SensorConfig& sensors);

// Mean propagated by one RK4 step of the design model with the (held) gyro
// reading; covariance by the first-order discretized linearization,
// P <- (I + F dt) P (I + F dt)^T + Q dt, resymmetrized.
EkfState ekf_predict(const EkfState& s, const Vec3& gyro, double c, double g,
                     double dt, const Mat5& Q);

// Kalman update with h(x) = (-c u, -c v), Joseph-form covariance update,
// then eta re-projected onto the unit sphere. Throws if the innovation
// covariance is not invertible.
EkfState ekf_update(const EkfState& s, const Eigen::Vector2d& accel_xy,
                    double c, const Eigen::Matrix2d& R);

}  // namespace dragobs
