#pragma once

#include <optional>

#include "rsf/evolution.hpp"
#include "rsf/reduced_state.hpp"

namespace rsf {

/// Detection threshold: eigenvalues in [-tol_detect, 0) are treated as
/// numerically inconclusive rather than as entanglement.
inline constexpr double kTolDetect = 1e-10;

struct PptReport {
  RealVector eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  bool entangled = false;
  Complex trace_norm;  // pre-normalization trace of the projected block
};

/// Eigenvalues of the partial transpose of a normalized two-qudit state.
/// The matrix is Hermitian-symmetrized first; a Hermiticity defect above
/// 1e-8 signals an upstream evolution bug and throws.
PptReport ppt_report(const TwoQuditState& s);
PptReport ppt_report(const ReducedState& rs, const Bipartition& bp);

/// First zero crossing of the minimum eigenvalue along a trajectory,
/// refined by bisection with re-integration (time tolerance 1e-8).
/// nullopt when the minimum eigenvalue never changes sign.
std::optional<double> critical_time(const Trajectory& traj, const Bipartition& bp);

/// Quadrature covariance matrix over (x_1,p_1,...,x_N,p_N), mean-subtracted,
/// vacuum = I/2.
struct CovarianceMatrix {
  RealMatrix v;  // 2N x 2N symmetric
};

CovarianceMatrix covariance_from_reduced(const ReducedState& rs);

/// Eigenvalues of Q V Q - (i/2) J for the partial-transpose test in phase
/// space; any eigenvalue below -tol flags entanglement (necessary and
/// sufficient only for 1x1-mode Gaussian states).
RealVector covariance_ppt(const CovarianceMatrix& v, const Bipartition& bp);

/// Photon-number statistics. mandel_q < 0 certifies sub-Poissonian light;
/// gen_q is the two-mode generalization built from the exchange correlator
///   gen_q(i,j) = ( <a_i^+ a_j a_j^+ a_i> - |<a_i^+ a_j>|^2 ) / <n_i> - 1,
/// with gen_q(i,i) = mandel_q(i). Throws EmptyMode when <n_i> vanishes.
double mandel_q(const ReducedState& rs, Index i);
double gen_q(const ReducedState& rs, Index i, Index j);

/// Field entropy of the single-particle reduction: sum over eigenvalues of
/// rho - |alpha><alpha| of (x+1)log(x+1) - x log x, k_B = 1.
double rsf_entropy(const ReducedState& rs);

}  // namespace rsf
