#pragma once

#include <Eigen/Dense>

namespace dragobs::detail {

// Classical 4-stage Runge-Kutta step on a fixed-size state vector. The
// derivative callable is evaluated at the stage times, so time-varying
// inputs enter at t, t+dt/2 and t+dt.
template <int N, typename F>
Eigen::Matrix<double, N, 1> rk4_step(const Eigen::Matrix<double, N, 1>& x,
                                     double t, double dt, F&& f) {
  using V = Eigen::Matrix<double, N, 1>;
  const V k1 = f(t, x);
  const V k2 = f(t + 0.5 * dt, V(x + 0.5 * dt * k1));
  const V k3 = f(t + 0.5 * dt, V(x + 0.5 * dt * k2));
  const V k4 = f(t + dt, V(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <int N, typename F>
Eigen::Matrix<double, N, 1> euler_step(const Eigen::Matrix<double, N, 1>& x,
                                       double t, double dt, F&& f) {
  return x + dt * f(t, x);
}

}  // namespace dragobs::detail
