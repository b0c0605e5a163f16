#include "dragobs/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace dragobs {

ErrorCoordinates error_variables(const TruthState& truth,
                                 const ObserverState& o, const Gains& gains) {
  ErrorCoordinates e;
  e.e_u = o.u_hat - truth.u;
  e.e_v = o.v_hat - truth.v;
  e.z1 = o.eta_hat.x() - truth.eta.x() - gains.k1 / gains.g * e.e_u;
  e.z2 = o.eta_hat.y() - truth.eta.y() - gains.k2 / gains.g * e.e_v;
  e.z3 = o.eta_hat.z() - truth.eta.z();
  return e;
}

double lyapunov_V(const ErrorCoordinates& e) {
  return 0.5 * (e.e_u * e.e_u + e.e_v * e.e_v + e.z1 * e.z1 + e.z2 * e.z2 +
                e.z3 * e.z3);
}

double lyapunov_W(double V, double epsilon) {
  if (!(V >= 0.0)) throw std::invalid_argument("lyapunov_W: V must be >= 0");
  return 3.0 * (1.0 - epsilon * epsilon) * V + 2.0 * V * V;
}

double w_decay_bound(const ErrorCoordinates& e, const Gains& g) {
  const GainValidation val = validate_gains(g);
  if (!val.ok)
    throw std::invalid_argument("w_decay_bound: invalid gains: " + val.describe());
  // The W construction additionally assumes 3 (1 - eps^2) >= 1.
  if (!(g.epsilon <= 0.8))
    throw std::invalid_argument("w_decay_bound: epsilon must be <= 0.8");

  const double eps2 = g.epsilon * g.epsilon;
  const double g2 = g.g * g.g;
  const double k10 = g.k1 - 1.0 - g.k3 / (2.0 * eps2);
  const double k20 = g.k2 - 1.0 - g.k3 / (2.0 * eps2);
  const double ku0 = g.ku - g.k1 * g.k1 * g.c_u * g.c_u / (2.0 * g2) - g2 / 2.0;
  const double kv0 = g.kv - g.k2 * g.k2 * g.c_u * g.c_u / (2.0 * g2) - g2 / 2.0;

  return -k10 * e.z1 * e.z1 - k20 * e.z2 * e.z2 - 0.5 * g.k3 * e.z3 * e.z3 -
         ku0 * e.e_u * e.e_u - kv0 * e.e_v * e.e_v;
}

LinearizedSubsystems linearized_subsystems(const Gains& g, double c_bar) {
  LinearizedSubsystems s;
  s.A1 << -g.k1, c_bar * g.k1 / g.g, g.g, -(g.ku + c_bar);
  s.A2 << -g.k2, c_bar * g.k2 / g.g, g.g, -(g.kv + c_bar);
  s.a3 = -g.k3 / (1.0 - g.epsilon * g.epsilon);
  return s;
}

EigenPair subsystem_eigenvalues(const Eigen::Matrix2d& A) {
  // lambda^2 + b lambda + c with b = -tr A, c = det A.
  const double b = -A.trace();
  const double c = A.determinant();
  const double disc = b * b - 4.0 * c;

  EigenPair out;
  if (disc >= 0.0) {
    out.real = true;
    const double root = std::sqrt(disc);
    double l1, l2;
    if (b == 0.0) {
      l1 = root / 2.0;
      l2 = -root / 2.0;
    } else {
      const double q = -0.5 * (b + std::copysign(root, b));
      l1 = q;
      l2 = q != 0.0 ? c / q : 0.0;
    }
    if (l1 < l2) std::swap(l1, l2);
    out.lambda1 = l1;
    out.lambda2 = l2;
  } else {
    out.real = false;
    const double re = -b / 2.0;
    const double im = std::sqrt(-disc) / 2.0;
    out.lambda1 = {re, im};
    out.lambda2 = {re, -im};
  }
  return out;
}

PolePlacement gains_for_poles(double lambda_fast, double lambda_slow,
                              double lambda_eta, double c_bar, double epsilon,
                              double g) {
  if (!(lambda_fast < 0.0) || !(lambda_slow < 0.0) || !(lambda_eta < 0.0))
    throw std::invalid_argument("gains_for_poles: poles must be strictly negative");

  PolePlacement out;
  out.gains.k1 = -lambda_slow;
  out.gains.k2 = -lambda_slow;
  out.gains.ku = -lambda_fast;
  out.gains.kv = -lambda_fast;
  out.gains.k3 = -lambda_eta * (1.0 - epsilon * epsilon);
  out.gains.epsilon = epsilon;
  out.gains.c_l = 0.8 * c_bar;
  out.gains.c_u = 1.2 * c_bar;
  out.gains.g = g;
  out.validation = validate_gains(out.gains);
  return out;
}

}  // namespace dragobs
