#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace dragobs {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

// Full simulated vehicle state in body axes. eta is the third column of the
// Earth-to-body rotation matrix and is kept on the unit sphere by the
// integrator (renormalized after every step).
struct TruthState {
  double u = 0.0;  // body-x velocity [m/s]
  double v = 0.0;  // body-y velocity [m/s]
  double w = 0.0;  // body-z velocity [m/s]
  Vec3 eta{0.0, 0.0, 1.0};

  bool finite() const;
  // Roll/pitch of the sphere-constrained attitude, radians.
  double roll() const { return std::atan2(eta.y(), eta.z()); }
  double pitch() const;
};

// Estimator state. eta_hat lives in R^3, not on the sphere; it merely
// converges to the sphere.
struct ObserverState {
  double u_hat = 0.0;
  double v_hat = 0.0;
  Vec3 eta_hat{0.0, 0.0, 1.0};

  bool finite() const;
};

// Observer tuning constants together with the model bounds they are
// validated against. Validity is a report (validate_gains), not a
// constructor failure, so deliberately invalid configurations can be run.
struct Gains {
  double k1 = 7.0;
  double k2 = 7.0;
  double k3 = 0.1;
  double ku = 49.0;
  double kv = 49.0;
  double epsilon = 0.1;  // sphere-margin parameter, in (0,1)
  double c_l = 0.2;      // drag-coefficient lower bound [1/s], must be > 0
  double c_u = 0.3;      // drag-coefficient upper bound [1/s]
  double g = 9.81;       // gravity [m/s^2]
};

struct GainViolation {
  std::string condition;  // the inequality that failed
  double slack;           // value minus threshold; negative when violated
};

struct GainValidation {
  bool ok = true;
  std::vector<GainViolation> violations;

  std::string describe() const;
};

// Evaluates the stability conditions on the gains:
//   k3 > 0,
//   k1 > 1 + k3/(2 eps^2),     k2 > 1 + k3/(2 eps^2),
//   ku > k1^2 c_u^2/(2 g^2) + g^2/2,   kv likewise with k2,
// plus 0 < eps < 1, c_l > 0, c_l <= c_u and g > 0. Never throws; every
// failed condition is reported with its numeric slack.
GainValidation validate_gains(const Gains& gains);

// One timestamped IMU reading: specific acceleration and body rates.
struct ImuSample {
  double t = 0.0;
  Vec3 a = Vec3::Zero();      // (ax, ay, az) [m/s^2]
  Vec3 omega = Vec3::Zero();  // (p, q, r) [rad/s]
};

struct RateThrustInput {
  Vec3 omega_body = Vec3::Zero();    // (p, q, r) [rad/s]
  double thrust = 0.0;               // T [N]
  Vec4 motor_speeds = Vec4::Zero();  // omega_i >= 0 [rad/s]
};

struct DragParams {
  double lambda = 1.5625e-4;  // rotor-drag constant, > 0
  double mass = 1.0;          // [kg]
  double omega_bar = 400.0;   // nominal hover motor speed [rad/s]

  // c_bar = 4 lambda omega_bar / m, the hover value of the drag coefficient.
  double nominal_c() const { return 4.0 * lambda * omega_bar / mass; }
};

}  // namespace dragobs
