#pragma once

#include <functional>

#include "dragobs/types.hpp"

namespace dragobs {

// Which truth dynamics to integrate: the full drag-enhanced model, or the
// simplified design model (Coriolis terms dropped, w frozen) that the
// observer and the convergence proof assume.
enum class TruthModel { full, design };

struct TruthDerivative {
  double du = 0.0;
  double dv = 0.0;
  double dw = 0.0;
  Vec3 deta = Vec3::Zero();
};

// Full model:
//   du = v r - w q + g eta1 - c u
//   dv = w p - u r + g eta2 - c v
//   dw = u q - v p + g eta3 - T/m
//   deta = -omega x eta
// Requires |eta| = 1 within 1e-6 and c >= 0; throws on non-finite input.
TruthDerivative truth_derivative(const TruthState& s, const RateThrustInput& in,
                                 double c, double g, double mass);

// Design model used by the observer and the EKF: Coriolis terms dropped and
// the w equation removed (dw = 0).
TruthDerivative design_derivative(const TruthState& s, const Vec3& omega_body,
                                  double c, double g);

// c(t) = (lambda/m) * sum_i omega_i(t). Throws on a negative motor speed.
double drag_coefficient(const DragParams& p, const Vec4& motor_speeds);

// Euclidean norm of (v r - w q, w p - u r, u q - v p).
double coriolis_norm(const TruthState& s, const Vec3& omega_body);

using InputProfileFn = std::function<RateThrustInput(double)>;

// One RK4 step of the truth dynamics with inputs sampled at the stage times
// and c(t) derived from the motor speeds, followed by renormalization of eta
// onto the unit sphere. Throws if the result is non-finite, naming the field.
TruthState step_rk4(const TruthState& s, const InputProfileFn& input, double t,
                    double dt, const DragParams& drag, double g,
                    TruthModel model = TruthModel::full);

}  // namespace dragobs
