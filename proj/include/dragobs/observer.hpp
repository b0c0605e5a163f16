#pragma once

#include <vector>

#include "dragobs/types.hpp"

namespace dragobs {

// Whether the observer uses the true time-varying drag coefficient c(t) or
// its constant hover value c_bar in both the a/c divisions and the copy
// dynamics.
enum class CoefficientMode { true_coefficient, nominal };

enum class ObserverIntegrator { rk4, euler };

struct ObserverConfig {
  Gains gains;
  CoefficientMode c_mode = CoefficientMode::true_coefficient;
  ObserverIntegrator integration = ObserverIntegrator::rk4;
  double dt = 1e-3;  // [s]
};

// sat(x) = min(1, (1 - eps^2)/|x|) x. Odd, 1-Lipschitz, |sat| <= 1 - eps^2.
double saturate(double x, double epsilon);

// E(x1,x2,x3) = (x3 - sqrt(1 - sat(x1^2 + x2^2))) / (x1^2 + x2^2 + 1 - eps^2).
// Defined everywhere: the saturation keeps the square root's argument >=
// eps^2 and the denominator >= 1 - eps^2. Zero exactly on the upper unit
// hemisphere with x1^2 + x2^2 <= 1 - eps^2.
double constraint_error(double x1, double x2, double x3, double epsilon);

struct ObserverDerivative {
  double du_hat = 0.0;
  double dv_hat = 0.0;
  Vec3 deta_hat = Vec3::Zero();
};

// The constant-gain observer ODEs: a copy of the design system plus
// correction terms driven by the velocity innovations (u_hat + ax/c,
// v_hat + ay/c) and the sphere-constraint feedback -k3 E evaluated at the
// shifted arguments. Throws if c < c_l (the divisions by c require the
// coefficient bounded away from zero).
ObserverDerivative observer_derivative(const ObserverState& o,
                                       const ImuSample& imu, double c,
                                       const Gains& gains);

// Advances the observer by one step with the measurement held constant
// (zero-order hold). Deterministic; throws if a state diverges, naming it.
ObserverState observer_step(const ObserverState& o, const ImuSample& imu,
                            const ObserverConfig& cfg, double c);

struct Angles {
  double phi = 0.0;    // roll [rad]
  double theta = 0.0;  // pitch [rad]
};

// Roll/pitch from an (unconstrained) eta estimate, following the
// parametrization (eta1, eta2, eta3) = (-sin th, sin ph cos th, cos ph cos th):
// theta = -asin(eta1/|eta|), phi = atan(eta2/eta3). Requires |eta| > 0 and
// eta3 > 0 (inside the admissible cap); arguments are clamped to [-1, 1].
Angles extract_angles(const Vec3& eta_hat);

// Diagnostic inversion of the design model: eta1 = (du/dt + c u)/g etc.,
// with the velocity derivatives taken by second-order finite differences
// (central in the interior, one-sided at the ends). Not used by the
// observer. Throws if 1 - eta1^2 - eta2^2 < 0 at any sample.
std::vector<Vec3> observability_oracle(const std::vector<double>& u,
                                       const std::vector<double>& v,
                                       const std::vector<double>& c, double g,
                                       double dt);

}  // namespace dragobs
