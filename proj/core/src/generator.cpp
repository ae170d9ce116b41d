#include "rsf/generator.hpp"

#include <algorithm>
#include <stdexcept>

namespace rsf {

GeneratorSpec GeneratorSpec::zero(Index n) {
  GeneratorSpec g;
  g.h = Matrix::Zero(n, n);
  g.xi = Vector::Zero(n);
  g.gamma_up = Matrix::Zero(n, n);
  g.gamma_down = Matrix::Zero(n, n);
  return g;
}

void GeneratorSpec::validate(double tol) const {
  const Index n = h.rows();
  if (h.cols() != n) throw std::invalid_argument("generator: h not square");
  auto want = [&](const Matrix& m, const char* name) {
    if (m.size() != 0 && (m.rows() != n || m.cols() != n))
      throw std::invalid_argument(std::string("generator: ") + name + " has wrong shape");
  };
  want(gamma_up, "gamma_up");
  want(gamma_down, "gamma_down");
  want(hs, "hs");
  if (xi.size() != 0 && xi.size() != n)
    throw std::invalid_argument("generator: xi has wrong length");
  if (hermiticity_defect(h) > tol)
    throw std::invalid_argument("generator: h is not Hermitian");
  for (auto* g : {&gamma_up, &gamma_down}) {
    if (g->size() == 0) continue;
    if (hermiticity_defect(*g) > tol)
      throw std::invalid_argument("generator: rate matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es((*g + g->adjoint()) / 2.0,
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
      throw std::invalid_argument("generator: rate matrix is not PSD");
  }
  if (hs.size() != 0 && (hs - hs.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("generator: hs is not symmetric");
  for (const auto& ch : scattering) {
    if (ch.u.rows() != n || ch.u.cols() != n)
      throw std::invalid_argument("generator: scattering unitary has wrong shape");
    if (!is_unitary(ch.u, tol))
      throw std::invalid_argument("generator: scattering matrix is not unitary");
    if (ch.kappa < 0) throw std::invalid_argument("generator: kappa < 0");
  }
}

double GeneratorSpec::default_step() const {
  double nh = hermitian_norm(h);
  if (hs.size() != 0) nh += 2.0 * hs.cwiseAbs().maxCoeff() * static_cast<double>(h.rows());
  double ng = 0.0;
  if (gamma_up.size()) ng += hermitian_norm(gamma_up);
  if (gamma_down.size()) ng += hermitian_norm(gamma_down);
  double nk = 0.0;
  for (const auto& ch : scattering) nk += ch.kappa;
  double scale = std::max({nh, ng, nk, 1.0});
  return 0.01 / scale;
}

std::pair<Matrix, Matrix> bath_to_gamma(const ThermalBathSpec& bath, Index n_modes) {
  Matrix up = Matrix::Zero(n_modes, n_modes);
  Matrix down = Matrix::Zero(n_modes, n_modes);
  for (Index k : bath.coupled_modes) {
    if (k < 0 || k >= n_modes)
      throw std::invalid_argument("bath_to_gamma: coupled mode out of range");
    up(k, k) = bath.gamma_omega * bath.n_omega;
    down(k, k) = bath.gamma_omega * (bath.n_omega + 1.0);
  }
  return {up, down};
}

GeneratorSpec bath_generator(const ThermalBathSpec& bath, Index n_modes) {
  GeneratorSpec g = GeneratorSpec::zero(n_modes);
  std::tie(g.gamma_up, g.gamma_down) = bath_to_gamma(bath, n_modes);
  return g;
}

}  // namespace rsf
