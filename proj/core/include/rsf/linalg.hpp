#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rsf {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Structural tolerance for Hermiticity/PSD/unitarity checks.
inline constexpr double kTol = 1e-10;
// Below this, a projected block is considered traceless (not normalizable).
inline constexpr double kTolTrace = 1e-12;

/// Kronecker product, row-major pair convention:
/// (A (x) B)[(i,j),(n,m)] = A(i,n) * B(j,m) with composite index (i,j) = i*cols_j + j.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index n = 0; n < a.cols(); ++n)
      out.block(i * b.rows(), n * b.cols(), b.rows(), b.cols()) = a(i, n) * b;
  return out;
}

/// Row-major vectorization: vec(M)[(i,j)] = M(i,j), composite index i*cols + j.
inline Vector vec_rowmajor(const Matrix& m) {
  Vector v(m.rows() * m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

inline double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_unitary(const Matrix& u, double tol = kTol) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
inline double hermitian_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace rsf
