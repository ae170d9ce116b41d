#pragma once

#include <vector>

#include "rsf/errors.hpp"
#include "rsf/linalg.hpp"

namespace rsf {

// ---------------------------------------------------------------------------
// Index conventions (used by every block and every reshuffling operator):
//
//   * modes are 0-based: k = 0..N-1
//   * composite two-particle index: idx(i,j) = i*N + j (row-major)
//   * rho(k,k')          = < a_k'^+ a_k >
//   * alpha(k)           = < a_k >
//   * r(k,k')            = < a_k' a_k >            (symmetric)
//   * rho4(idx(i,j), idx(n,m)) = < a_n^+ a_i a_m^+ a_j >
//   * beta(idx(k2,k3), k1)     = < a_k1^+ a_k2 a_k3 >
//
// rho4 is laid out so that first-quantization operators act by ordinary
// matrix algebra: an additive pair observable o (x) 1 + 1 (x) o multiplies
// rho4 like any N^2 x N^2 matrix, and the pair-swap below exchanges the two
// single-particle slots.
// ---------------------------------------------------------------------------

/// Total reduced state of an N-mode bosonic field: second and fourth moments
/// plus the averaged field and the three-operator tensor needed under
/// coherent pumping.
struct ReducedState {
  Index n_modes = 0;
  Matrix rho;    // N x N
  Vector alpha;  // N
  Matrix r;      // N x N
  Matrix rho4;   // N^2 x N^2
  Matrix beta;   // N^2 x N

  static ReducedState vacuum(Index n_modes);

  ReducedState& operator+=(const ReducedState& other);
  ReducedState operator+(const ReducedState& other) const;
  ReducedState operator*(double scale) const;
  ReducedState operator*(Complex scale) const;

  /// Largest |entry| over all blocks; used for NaN checks and comparisons.
  double max_abs() const;
  bool has_nan() const;
};

/// Disjoint mode index sets defining the two parties of a bipartition.
/// Indices are 0-based and kept sorted.
class Bipartition {
 public:
  Bipartition(std::vector<Index> set_a, std::vector<Index> set_b);

  const std::vector<Index>& set_a() const { return a_; }
  const std::vector<Index>& set_b() const { return b_; }
  Index dim_a() const { return static_cast<Index>(a_.size()); }
  Index dim_b() const { return static_cast<Index>(b_.size()); }
  /// Largest mode index referenced (for range validation).
  Index max_mode() const;

 private:
  std::vector<Index> a_, b_;
};

/// Trace-normalized projection of rho4 onto the cross-party block: a
/// d_A * d_B dimensional two-qudit density matrix. trace_norm records the
/// pre-normalization trace (the cross-party number correlator).
struct TwoQuditState {
  Index dim_a = 0;
  Index dim_b = 0;
  Matrix matrix;       // (dim_a*dim_b) x (dim_a*dim_b)
  Complex trace_norm;  // trace of the projected block before normalization
};

/// Permutation matrix exchanging the two slots of a pair ket:
/// tau |m,n> = |n,m>. Real, symmetric, involutive.
Matrix swap_matrix(Index d);

/// Pair-swap acting on the ket (row) side: tau * o. Row dimension must be a
/// perfect square.
Matrix tau_left(const Matrix& o);

/// Pair-swap acting on the bra (column) side: o * tau.
Matrix tau_right(const Matrix& o);

/// Partial transpose over the second tensor factor of a two-qudit matrix:
/// ((a,b),(a',b')) -> ((a,b'),(a',b)).
Matrix partial_transpose_second(const TwoQuditState& s);
Matrix partial_transpose_second(const Matrix& m, Index dim_a, Index dim_b);

/// Cross-party block of rho4: rows with first slot in set_a and second slot
/// in set_b, columns likewise, densely reindexed (A-major, both ascending).
Matrix project_bipartition(const ReducedState& rs, const Bipartition& bp);

/// Normalize a projected block to unit trace. Throws TracelessState when the
/// trace is below tol_trace (states whose cross correlations vanish).
TwoQuditState normalize_projected(const Matrix& m, Index dim_a, Index dim_b,
                                  double tol_trace = kTolTrace);
TwoQuditState normalize_projected(const ReducedState& rs, const Bipartition& bp,
                                  double tol_trace = kTolTrace);

/// Reduced state of a product state, A's modes first then B's. All cross
/// moments factorize into lower moments of the two factors.
ReducedState compose_product(const ReducedState& a, const ReducedState& b);

/// Additive observable sum_{k,k'} o(k,k') a_k^+ a_k' -> tr(rho * o).
Complex expectation(const ReducedState& rs, const Matrix& o);

/// Fourth-order observable sum o(k1,k2,k3,k4) a_k1^+ a_k2 a_k3^+ a_k4 given
/// as o4(idx(k1,k3), idx(k2,k4)) -> tr(rho4 * o4).
Complex expectation_fourth(const ReducedState& rs, const Matrix& o4);

/// Mode transformation a_k -> sum_k' u(k,k') a_k' applied to every block:
/// rho4 -> (u(x)u) rho4 (u(x)u)^+, beta -> (u(x)u) beta u^+, rho -> u rho u^+,
/// r -> u r u^T, alpha -> u alpha. u must be unitary within tol.
ReducedState apply_mode_unitary(const ReducedState& rs, const Matrix& u,
                                double tol = 1e-8);

/// Same transformation without the unitarity check (used for lossy
/// element-wise maps such as detector efficiency).
ReducedState apply_mode_matrix(const ReducedState& rs, const Matrix& u);

}  // namespace rsf
