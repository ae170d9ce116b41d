#include "rsf/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace rsf {

Matrix beamsplitter_unitary(double t, Index i, Index j, Index n_modes) {
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("beamsplitter_unitary: transmissivity outside [0,1]");
  if (i == j || i < 0 || j < 0 || i >= n_modes || j >= n_modes)
    throw std::invalid_argument("beamsplitter_unitary: invalid mode pair");
  Matrix u = Matrix::Identity(n_modes, n_modes);
  double st = std::sqrt(t), sr = std::sqrt(1.0 - t);
  u(i, i) = st;
  u(j, j) = st;
  u(i, j) = kI * sr;
  u(j, i) = kI * sr;
  return u;
}

ReducedState phase_shifter(const ReducedState& rs, Index i, double dphi) {
  if (i < 0 || i >= rs.n_modes)
    throw std::invalid_argument("phase_shifter: mode out of range");
  Matrix u = Matrix::Identity(rs.n_modes, rs.n_modes);
  u(i, i) = std::exp(kI * dphi);
  return apply_mode_unitary(rs, u);
}

GeneratorSpec phase_segment(const GeneratorSpec& g, Index i, double rate) {
  if (i < 0 || i >= g.n_modes())
    throw std::invalid_argument("phase_segment: mode out of range");
  GeneratorSpec out = g;
  out.h(i, i) += rate;
  return out;
}

ReducedState detector_efficiency(const ReducedState& rs, const RealVector& etas) {
  if (etas.size() != rs.n_modes)
    throw std::invalid_argument("detector_efficiency: one efficiency per mode required");
  for (Index k = 0; k < etas.size(); ++k)
    if (etas(k) < 0.0 || etas(k) > 1.0)
      throw std::invalid_argument("detector_efficiency: eta outside [0,1]");
  Matrix root = Matrix::Zero(rs.n_modes, rs.n_modes);
  for (Index k = 0; k < etas.size(); ++k) root(k, k) = std::sqrt(etas(k));
  return apply_mode_matrix(rs, root);
}

std::pair<Matrix, RealVector> diagonalize_hamiltonian(const Matrix& h) {
  if (hermiticity_defect(h) > 1e-8)
    throw std::invalid_argument("diagonalize_hamiltonian: h is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.adjoint()) / 2.0);
  // eigenvalues ascend; u rows are the eigenvectors so that u h u^+ is diagonal
  return {Matrix(es.eigenvectors().adjoint()), es.eigenvalues()};
}

}  // namespace rsf
