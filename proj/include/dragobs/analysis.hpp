#pragma once

#include <complex>

#include "dragobs/types.hpp"

namespace dragobs {

// Error coordinates of the convergence analysis. z1, z2 are the attitude
// errors shifted by the scaled velocity errors (the off-the-manifold
// coordinates); z3 is the plain eta3 error.
struct ErrorCoordinates {
  double e_u = 0.0;  // u_hat - u [m/s]
  double e_v = 0.0;  // v_hat - v [m/s]
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
};

ErrorCoordinates error_variables(const TruthState& truth,
                                 const ObserverState& o, const Gains& gains);

// V = (e_u^2 + e_v^2 + z1^2 + z2^2 + z3^2) / 2.
double lyapunov_V(const ErrorCoordinates& e);

// W = 3 (1 - eps^2) V + 2 V^2, strictly increasing in V.
double lyapunov_W(double V, double epsilon);

// Right-hand side of the decay inequality
//   dW/dt <= -k10 z1^2 - k20 z2^2 - (k3/2) z3^2 - ku0 e_u^2 - kv0 e_v^2
// with k10 = k1 - 1 - k3/(2 eps^2), k20 likewise, and
// ku0 = ku - k1^2 c_u^2/(2 g^2) - g^2/2, kv0 likewise with k2. Requires
// valid gains (the derived constants are then positive) and epsilon <= 0.8
// so that 3 (1 - eps^2) >= 1, which the W construction assumes. Throws
// otherwise. Strictly negative for nonzero errors.
double w_decay_bound(const ErrorCoordinates& e, const Gains& gains);

struct LinearizedSubsystems {
  Eigen::Matrix2d A1;  // (z1, e_u) block: [[-k1, c k1/g], [g, -(ku + c)]]
  Eigen::Matrix2d A2;  // (z2, e_v) block with k2, kv
  double a3 = 0.0;     // z3 rate: -k3 / (1 - eps^2)
};

// First-order error dynamics about hover, decoupled into three subsystems.
LinearizedSubsystems linearized_subsystems(const Gains& gains, double c_bar);

struct EigenPair {
  std::complex<double> lambda1;  // sorted descending by real part
  std::complex<double> lambda2;
  bool real = true;
};

// Exact roots of the 2x2 characteristic polynomial via the (numerically
// stable) quadratic formula.
EigenPair subsystem_eigenvalues(const Eigen::Matrix2d& A);

struct PolePlacement {
  Gains gains;
  GainValidation validation;
};

// Inverts the approximate pole placement: k1 = k2 = -lambda_slow,
// ku = kv = -lambda_fast, k3 = -lambda_eta (1 - eps^2). The returned Gains
// carry c_l = 0.8 c_bar, c_u = 1.2 c_bar and the supplied gravity, and the
// result is validated. Exact only up to O(c_bar) coupling in the 2x2 blocks.
// Throws if a desired pole is not strictly negative.
PolePlacement gains_for_poles(double lambda_fast, double lambda_slow,
                              double lambda_eta, double c_bar, double epsilon,
                              double g = 9.81);

}  // namespace dragobs
