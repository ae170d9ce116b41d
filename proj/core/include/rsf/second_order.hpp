#pragma once

#include "rsf/evolution.hpp"

namespace rsf {

// Extra moment blocks needed once the Hamiltonian carries squeezing terms.
// Index placement (composite idx(i,j) = i*N + j as everywhere):
//   m(idx(k2,k4), idx(k1,k3))    = < a_k1^+ a_k2 a_k3 a_k4 >
//   q(idx(k2,k4), idx(k1,k3))    = < a_k1 a_k2 a_k3 a_k4 >
//   zeta(idx(k2,k3), k1)         = < a_k1 a_k2 a_k3 >
// q and zeta are fully symmetric under permutations of their operator slots;
// m is symmetric over its three annihilation slots.
struct SecondOrderState {
  ReducedState base;
  Matrix m;     // N^2 x N^2
  Matrix q;     // N^2 x N^2
  Matrix zeta;  // N^2 x N

  static SecondOrderState vacuum(Index n_modes);
  static SecondOrderState extend(const ReducedState& base);  // m, q, zeta zeroed

  SecondOrderState operator+(const SecondOrderState& other) const;
  SecondOrderState operator*(double scale) const;
  bool has_nan() const;
};

/// Derivative of the enlarged moment set under the full generator including
/// the symmetric squeezing block hs. With hs = 0 the base quintuple follows
/// the first-order equations exactly.
SecondOrderState rhs_second_order(const SecondOrderState& s, const GeneratorSpec& g);

struct SecondOrderTrajectory {
  std::vector<double> times;
  std::vector<SecondOrderState> states;
};

SecondOrderTrajectory integrate_second_order(const SecondOrderState& initial,
                                             const std::vector<Segment>& segments,
                                             const std::vector<double>& t_grid,
                                             const IntegrateOptions& opts = {});

}  // namespace rsf
