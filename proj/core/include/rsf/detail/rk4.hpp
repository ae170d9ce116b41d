#pragma once

#include <cmath>

namespace rsf::detail {

/// One classical fourth-order step. State needs operator+ and operator*(double);
/// f maps State -> State.
template <class State, class Rhs>
State rk4_step(const State& s, double dt, Rhs&& f) {
  State k1 = f(s);
  State k2 = f(s + k1 * (dt / 2.0));
  State k3 = f(s + k2 * (dt / 2.0));
  State k4 = f(s + k3 * dt);
  return s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
}

/// Advance from t0 to t1 with uniform steps bounded by dt_max.
template <class State, class Rhs>
State rk4_advance(State s, double t0, double t1, double dt_max, Rhs&& f) {
  double span = t1 - t0;
  if (span <= 0.0) return s;
  int n = std::max(1, static_cast<int>(std::ceil(span / dt_max)));
  double dt = span / n;
  for (int i = 0; i < n; ++i) s = rk4_step(s, dt, f);
  return s;
}

}  // namespace rsf::detail
