#include "dragobs/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dragobs/integrate.hpp"

namespace dragobs {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 pack(const TruthState& s) {
  Vec6 x;
  x << s.u, s.v, s.w, s.eta;
  return x;
}

TruthState unpack(const Vec6& x) {
  TruthState s;
  s.u = x[0];
  s.v = x[1];
  s.w = x[2];
  s.eta = x.tail<3>();
  return s;
}

void check_preconditions(const TruthState& s, double c) {
  if (!s.finite()) throw std::invalid_argument("truth_derivative: non-finite state");
  if (!(c >= 0.0)) throw std::invalid_argument("truth_derivative: c must be >= 0");
  if (std::abs(s.eta.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("truth_derivative: |eta| must be 1 within 1e-6");
}

}  // namespace

TruthDerivative truth_derivative(const TruthState& s, const RateThrustInput& in,
                                 double c, double g, double mass) {
  check_preconditions(s, c);
  if (!in.omega_body.allFinite() || !std::isfinite(in.thrust))
    throw std::invalid_argument("truth_derivative: non-finite input");
  if (!(mass > 0.0)) throw std::invalid_argument("truth_derivative: mass must be > 0");

  const double p = in.omega_body.x();
  const double q = in.omega_body.y();
  const double r = in.omega_body.z();

  TruthDerivative d;
  d.du = s.v * r - s.w * q + g * s.eta.x() - c * s.u;
  d.dv = s.w * p - s.u * r + g * s.eta.y() - c * s.v;
  d.dw = s.u * q - s.v * p + g * s.eta.z() - in.thrust / mass;
  d.deta = -in.omega_body.cross(s.eta);
  return d;
}

TruthDerivative design_derivative(const TruthState& s, const Vec3& omega_body,
                                  double c, double g) {
  check_preconditions(s, c);

  TruthDerivative d;
  d.du = g * s.eta.x() - c * s.u;
  d.dv = g * s.eta.y() - c * s.v;
  d.dw = 0.0;
  d.deta = -omega_body.cross(s.eta);
  return d;
}

double drag_coefficient(const DragParams& p, const Vec4& motor_speeds) {
  for (int i = 0; i < 4; ++i) {
    if (!(motor_speeds[i] >= 0.0))
      throw std::invalid_argument("drag_coefficient: motor speed " +
                                  std::to_string(i) + " is negative");
  }
  return p.lambda / p.mass * motor_speeds.sum();
}

double coriolis_norm(const TruthState& s, const Vec3& omega_body) {
  const double p = omega_body.x(), q = omega_body.y(), r = omega_body.z();
  const Vec3 coriolis(s.v * r - s.w * q, s.w * p - s.u * r, s.u * q - s.v * p);
  return coriolis.norm();
}

TruthState step_rk4(const TruthState& s, const InputProfileFn& input, double t,
                    double dt, const DragParams& drag, double g,
                    TruthModel model) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be > 0");

  auto f = [&](double ts, const Vec6& x) -> Vec6 {
    const TruthState state = unpack(x);
    const RateThrustInput in = input(ts);
    const double c = drag_coefficient(drag, in.motor_speeds);
    const TruthDerivative d = model == TruthModel::full
                                  ? truth_derivative(state, in, c, g, drag.mass)
                                  : design_derivative(state, in.omega_body, c, g);
    Vec6 dx;
    dx << d.du, d.dv, d.dw, d.deta;
    return dx;
  };

  // The derivative preconditions require |eta| = 1 only loosely (1e-6), so
  // intermediate RK4 stages that drift off the sphere by O(dt) still pass.
  TruthState next = unpack(detail::rk4_step<6>(pack(s), t, dt, f));

  const double n = next.eta.norm();
  if (!std::isfinite(n) || n == 0.0)
    throw std::runtime_error("step_rk4: eta diverged");
  next.eta /= n;

  if (!std::isfinite(next.u)) throw std::runtime_error("step_rk4: u diverged");
  if (!std::isfinite(next.v)) throw std::runtime_error("step_rk4: v diverged");
  if (!std::isfinite(next.w)) throw std::runtime_error("step_rk4: w diverged");
  return next;
}

}  // namespace dragobs
