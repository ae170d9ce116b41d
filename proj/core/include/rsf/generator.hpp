#pragma once

#include <vector>

#include "rsf/linalg.hpp"

namespace rsf {

/// One random elastic scattering channel: unitary mode mixing u applied at
/// rate kappa. u acts on the column of annihilation operators,
/// a_k -> sum_k' u(k,k') a_k'.
struct ScatteringChannel {
  Matrix u;
  double kappa = 0.0;
};

/// Reduced generator of the open dynamics.
///
/// Rate matrices are Hermitian PSD with the row indexing the daggered mode:
///   loss:  sum_{q,p} gamma_down(q,p) ( a_p rho a_q^+ - 1/2 {a_q^+ a_p, rho} )
///   gain:  sum_{q,p} gamma_up(q,p)   ( a_q^+ rho a_p - 1/2 {a_p a_q^+, rho} )
///
/// hs is the optional symmetric squeezing block: the Hamiltonian carries
/// sum_{k,k'} ( hs(k,k') a_k a_k' + conj(hs(k,k')) a_k^+ a_k'^+ ) in addition
/// to sum h(k,k') a_k^+ a_k'. Only the second-order integrator accepts it.
struct GeneratorSpec {
  Matrix h;          // N x N Hermitian
  Vector xi;         // N, coherent pump
  Matrix gamma_up;   // N x N PSD
  Matrix gamma_down; // N x N PSD
  std::vector<ScatteringChannel> scattering;
  Matrix hs;         // N x N symmetric, empty when absent

  static GeneratorSpec zero(Index n_modes);

  Index n_modes() const { return h.rows(); }
  bool has_squeezing() const { return hs.size() != 0 && hs.cwiseAbs().maxCoeff() > 0.0; }
  bool has_pump() const { return xi.size() != 0 && xi.cwiseAbs().maxCoeff() > 0.0; }

  /// Throws std::invalid_argument on shape/Hermiticity/unitarity violations.
  void validate(double tol = 1e-8) const;

  /// Step bound used by the fixed-step integrator:
  /// dt = 0.01 / max(|h|_2, |g_up|_2 + |g_down|_2, sum kappa_j, 1).
  double default_step() const;
};

/// Thermal reservoir attached to a subset of modes: mean occupation n_omega
/// and coupling rate gamma_omega. Detailed balance holds by construction,
/// gain/loss = n/(n+1).
struct ThermalBathSpec {
  double n_omega = 0.0;
  double gamma_omega = 1.0;
  std::vector<Index> coupled_modes;
};

/// Diagonal rate matrices of a thermal bath:
/// gamma_up(k,k) = g*n, gamma_down(k,k) = g*(n+1) on coupled modes.
std::pair<Matrix, Matrix> bath_to_gamma(const ThermalBathSpec& bath, Index n_modes);

/// Convenience: generator with free Hamiltonian zero and the given bath.
GeneratorSpec bath_generator(const ThermalBathSpec& bath, Index n_modes);

}  // namespace rsf
