#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "rsf/generator.hpp"
#include "rsf/presets.hpp"
#include "rsf/reduced_state.hpp"
#include "rsf/second_order.hpp"

namespace rsf {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Truncated multimode Fock basis, mode-0 occupation most significant.
/// Caches per-mode annihilation operators as sparse matrices.
class FockBasis {
 public:
  FockBasis(Index n_modes, std::vector<Index> cutoffs);
  FockBasis(Index n_modes, Index uniform_cutoff);

  Index n_modes() const { return n_modes_; }
  Index dim() const { return dim_; }
  const std::vector<Index>& cutoffs() const { return cutoffs_; }
  const SparseMatrix& a(Index mode) const { return a_[mode]; }
  const SparseMatrix& adag(Index mode) const { return adag_[mode]; }

  /// Occupation of `mode` in basis state `idx`.
  Index occupation(Index idx, Index mode) const;

  /// Fock-space operator of the mode transformation a_k -> sum u(k,k') a_k',
  /// exact unitary on the truncated space (conjugation defect confined to the
  /// cutoff edge).
  Matrix lift_mode_unitary(const Matrix& u) const;

 private:
  Index n_modes_;
  std::vector<Index> cutoffs_;
  Index dim_;
  std::vector<Index> strides_;
  std::vector<SparseMatrix> a_, adag_;
};

/// Dense density matrix on a truncated Fock basis. The brute-force ground
/// truth for everything the reduced formalism computes.
struct FockState {
  const FockBasis* basis = nullptr;
  Matrix rho;  // dim x dim

  double trace_real() const { return rho.trace().real(); }
  /// Max total population sitting at any mode's top level.
  double cutoff_leakage() const;
};

/// Pure state on a truncated Fock basis; used where a density matrix would
/// be too large (high-cutoff preparations and unitary-only evolution).
struct FockPure {
  const FockBasis* basis = nullptr;
  Vector psi;

  double cutoff_leakage() const;
  FockState to_density() const;
};

/// Full open-dynamics derivative: Hamiltonian (with optional squeezing part),
/// coherent pump, scattering channels, and gain/loss dissipators with matrix
/// rates. Throws NumericalFailure when cutoff leakage exceeds the threshold.
Matrix gkls_rhs(const FockState& state, const GeneratorSpec& g);

struct FockEvolveOptions {
  double dt = 0.0;              // 0 = GeneratorSpec::default_step
  double leakage_threshold = 1e-6;
};

/// Fixed-step integration of the density matrix over the grid.
std::vector<FockState> evolve_fock(const FockState& initial,
                                   const GeneratorSpec& g,
                                   const std::vector<double>& t_grid,
                                   const FockEvolveOptions& opts = {});

/// Schroedinger integration of a pure state; generator must be unitary
/// (no pump, no dissipators, no scattering).
std::vector<FockPure> evolve_fock_pure(const FockPure& initial,
                                       const GeneratorSpec& g,
                                       const std::vector<double>& t_grid,
                                       const FockEvolveOptions& opts = {});

/// Preset preparation, renormalized after truncation.
FockState prepare(const FockBasis& basis, const StatePreset& preset);
FockPure prepare_pure(const FockBasis& basis, const StatePreset& preset);

/// Moment extraction in the exact operator order of the reduced-state
/// definitions. Warns on stderr when cutoff leakage exceeds `leak_warn`.
ReducedState reduce_from_fock(const FockState& f, double leak_warn = 1e-8);
ReducedState reduce_from_fock(const FockPure& f, double leak_warn = 1e-8);
SecondOrderState reduce_second_from_fock(const FockState& f, double leak_warn = 1e-8);
SecondOrderState reduce_second_from_fock(const FockPure& f, double leak_warn = 1e-8);

}  // namespace rsf
