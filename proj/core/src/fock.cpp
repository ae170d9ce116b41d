#include "rsf/fock.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "rsf/detail/rk4.hpp"
#include "rsf/errors.hpp"

namespace rsf {

namespace {
constexpr Index kMaxDensityDim = 4096;  // oracle is a test instrument
}

FockBasis::FockBasis(Index n_modes, std::vector<Index> cutoffs)
    : n_modes_(n_modes), cutoffs_(std::move(cutoffs)) {
  if (static_cast<Index>(cutoffs_.size()) != n_modes_)
    throw std::invalid_argument("FockBasis: one cutoff per mode required");
  for (Index c : cutoffs_)
    if (c < 1) throw std::invalid_argument("FockBasis: cutoff must be >= 1");
  dim_ = 1;
  for (Index c : cutoffs_) dim_ *= (c + 1);
  strides_.assign(n_modes_, 1);
  for (Index k = n_modes_ - 2; k >= 0; --k)
    strides_[k] = strides_[k + 1] * (cutoffs_[k + 1] + 1);

  a_.reserve(n_modes_);
  adag_.reserve(n_modes_);
  for (Index k = 0; k < n_modes_; ++k) {
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(dim_);
    for (Index idx = 0; idx < dim_; ++idx) {
      Index nk = occupation(idx, k);
      if (nk >= 1) trip.emplace_back(idx - strides_[k], idx, std::sqrt(double(nk)));
    }
    SparseMatrix m(dim_, dim_);
    m.setFromTriplets(trip.begin(), trip.end());
    a_.push_back(m);
    adag_.push_back(SparseMatrix(m.adjoint()));
  }
}

FockBasis::FockBasis(Index n_modes, Index uniform_cutoff)
    : FockBasis(n_modes, std::vector<Index>(n_modes, uniform_cutoff)) {}

Index FockBasis::occupation(Index idx, Index mode) const {
  return (idx / strides_[mode]) % (cutoffs_[mode] + 1);
}

Matrix FockBasis::lift_mode_unitary(const Matrix& u) const {
  if (u.rows() != n_modes_ || u.cols() != n_modes_)
    throw std::invalid_argument("lift_mode_unitary: dimension mismatch");
  if (!is_unitary(u, 1e-8))
    throw std::invalid_argument("lift_mode_unitary: matrix is not unitary");
  // generator g = i log(u) is Hermitian; the lift is exp(-i sum g a^+ a)
  Eigen::ComplexSchur<Matrix> schur(u);
  const Matrix& t = schur.matrixT();
  const Matrix& z = schur.matrixU();
  Vector logd(n_modes_);
  for (Index k = 0; k < n_modes_; ++k) logd(k) = std::log(t(k, k));
  Matrix g = z * (kI * logd).asDiagonal() * z.adjoint();
  g = (g + g.adjoint()) / 2.0;

  Matrix big = Matrix::Zero(dim_, dim_);
  for (Index k = 0; k < n_modes_; ++k)
    for (Index kp = 0; kp < n_modes_; ++kp)
      if (std::abs(g(k, kp)) > 0) big += g(k, kp) * Matrix(adag_[k] * a_[kp]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(big);
  Vector phase =
      ((-kI) * es.eigenvalues().cast<Complex>().array()).exp().matrix();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

double FockState::cutoff_leakage() const {
  double worst = 0.0;
  for (Index k = 0; k < basis->n_modes(); ++k) {
    double pop = 0.0;
    for (Index idx = 0; idx < basis->dim(); ++idx)
      if (basis->occupation(idx, k) == basis->cutoffs()[k])
        pop += std::abs(rho(idx, idx).real());
    worst = std::max(worst, pop);
  }
  return worst;
}

double FockPure::cutoff_leakage() const {
  double worst = 0.0;
  for (Index k = 0; k < basis->n_modes(); ++k) {
    double pop = 0.0;
    for (Index idx = 0; idx < basis->dim(); ++idx)
      if (basis->occupation(idx, k) == basis->cutoffs()[k]) pop += std::norm(psi(idx));
    worst = std::max(worst, pop);
  }
  return worst;
}

FockState FockPure::to_density() const {
  if (basis->dim() > kMaxDensityDim)
    throw std::invalid_argument("FockPure::to_density: dimension too large");
  return FockState{basis, psi * psi.adjoint()};
}

namespace {

// Per-segment assembled Lindbladian pieces.
struct Lindbladian {
  const FockBasis* basis;
  SparseMatrix h;       // Hamiltonian incl. squeezing part
  SparseMatrix pump;    // xi a^+ - xi* a
  bool has_h = false, has_pump = false;
  std::vector<std::pair<double, Matrix>> scatterers;  // (kappa, U)
  // gain/loss rates kept as matrix pairs acting through sparse ladders
  Matrix gu, gd;

  explicit Lindbladian(const FockBasis& b, const GeneratorSpec& g) : basis(&b) {
    const Index n = b.n_modes();
    if (g.n_modes() != n) throw std::invalid_argument("fock: generator dimension mismatch");
    SparseMatrix hh(b.dim(), b.dim());
    if (g.h.size() && g.h.cwiseAbs().maxCoeff() > 0) {
      for (Index k = 0; k < n; ++k)
        for (Index kp = 0; kp < n; ++kp)
          if (std::abs(g.h(k, kp)) > 0)
            hh += g.h(k, kp) * SparseMatrix(b.adag(k) * b.a(kp));
      has_h = true;
    }
    if (g.hs.size() && g.hs.cwiseAbs().maxCoeff() > 0) {
      for (Index k = 0; k < n; ++k)
        for (Index kp = 0; kp < n; ++kp)
          if (std::abs(g.hs(k, kp)) > 0) {
            hh += g.hs(k, kp) * SparseMatrix(b.a(k) * b.a(kp));
            hh += std::conj(g.hs(k, kp)) * SparseMatrix(b.adag(k) * b.adag(kp));
          }
      has_h = true;
    }
    h = hh;
    if (g.has_pump()) {
      SparseMatrix p(b.dim(), b.dim());
      for (Index k = 0; k < n; ++k) {
        if (std::abs(g.xi(k)) == 0) continue;
        p += g.xi(k) * b.adag(k);
        p -= std::conj(g.xi(k)) * b.a(k);
      }
      pump = p;
      has_pump = true;
    }
    for (const auto& ch : g.scattering)
      if (ch.kappa > 0) scatterers.emplace_back(ch.kappa, b.lift_mode_unitary(ch.u));
    gu = g.gamma_up.size() ? g.gamma_up : Matrix::Zero(n, n);
    gd = g.gamma_down.size() ? g.gamma_down : Matrix::Zero(n, n);
  }

  Matrix apply(const Matrix& rho) const {
    const FockBasis& b = *basis;
    const Index n = b.n_modes();
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    if (has_h) out += -kI * (h * rho - rho * h);
    if (has_pump) out += pump * rho - rho * pump;
    for (const auto& [kappa, u] : scatterers)
      out += kappa * (u * rho * u.adjoint() - rho);
    for (Index qq = 0; qq < n; ++qq)
      for (Index p = 0; p < n; ++p) {
        if (std::abs(gd(qq, p)) > 0) {
          Matrix ap_rho = b.a(p) * rho;
          Matrix rho_aq = rho * b.adag(qq);
          out += gd(qq, p) * (Matrix(ap_rho * b.adag(qq)) -
                              0.5 * (Matrix(b.adag(qq) * ap_rho) +
                                     Matrix(rho_aq * b.a(p))));
        }
        if (std::abs(gu(qq, p)) > 0) {
          Matrix aq_rho = b.adag(qq) * rho;
          Matrix rho_ap = rho * b.a(p);
          out += gu(qq, p) * (Matrix(aq_rho * b.a(p)) -
                              0.5 * (Matrix(b.a(p) * aq_rho) +
                                     Matrix(rho_ap * b.adag(qq))));
        }
      }
    return out;
  }
};

}  // namespace

Matrix gkls_rhs(const FockState& state, const GeneratorSpec& g) {
  g.validate();
  return Lindbladian(*state.basis, g).apply(state.rho);
}

std::vector<FockState> evolve_fock(const FockState& initial, const GeneratorSpec& g,
                                   const std::vector<double>& t_grid,
                                   const FockEvolveOptions& opts) {
  g.validate();
  if (initial.basis->dim() > kMaxDensityDim)
    throw std::invalid_argument("evolve_fock: basis dimension exceeds the density-matrix bound");
  Lindbladian lb(*initial.basis, g);
  double dt = opts.dt > 0 ? opts.dt : g.default_step();
  std::vector<FockState> out;
  Matrix rho = initial.rho;
  double t = 0.0;
  for (double tg : t_grid) {
    rho = detail::rk4_advance(std::move(rho), t, tg, dt,
                              [&](const Matrix& x) { return lb.apply(x); });
    t = tg;
    FockState s{initial.basis, rho};
    if (!rho.allFinite())
      throw NumericalFailure("evolve_fock: non-finite state at t = " + std::to_string(tg));
    if (s.cutoff_leakage() > opts.leakage_threshold)
      throw NumericalFailure("evolve_fock: cutoff leakage " +
                             std::to_string(s.cutoff_leakage()) + " at t = " +
                             std::to_string(tg) + "; raise the cutoff");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FockPure> evolve_fock_pure(const FockPure& initial, const GeneratorSpec& g,
                                       const std::vector<double>& t_grid,
                                       const FockEvolveOptions& opts) {
  g.validate();
  if (g.has_pump() || !g.scattering.empty() ||
      (g.gamma_up.size() && g.gamma_up.cwiseAbs().maxCoeff() > 0) ||
      (g.gamma_down.size() && g.gamma_down.cwiseAbs().maxCoeff() > 0))
    throw std::invalid_argument("evolve_fock_pure: generator must be unitary (Hamiltonian only)");
  Lindbladian lb(*initial.basis, g);
  double dt = opts.dt > 0 ? opts.dt : g.default_step();
  std::vector<FockPure> out;
  Vector psi = initial.psi;
  double t = 0.0;
  for (double tg : t_grid) {
    psi = detail::rk4_advance(std::move(psi), t, tg, dt,
                              [&](const Vector& x) { return Vector(-kI * (lb.h * x)); });
    t = tg;
    FockPure s{initial.basis, psi};
    if (!psi.allFinite())
      throw NumericalFailure("evolve_fock_pure: non-finite state");
    if (s.cutoff_leakage() > opts.leakage_threshold)
      throw NumericalFailure("evolve_fock_pure: cutoff leakage; raise the cutoff");
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

Index basis_index(const FockBasis& b, const std::vector<Index>& occ) {
  Index idx = 0;
  for (Index k = 0; k < b.n_modes(); ++k) {
    if (occ[k] > b.cutoffs()[k]) return -1;
    Index stride = 1;
    for (Index j = k + 1; j < b.n_modes(); ++j) stride *= (b.cutoffs()[j] + 1);
    idx += occ[k] * stride;
  }
  return idx;
}

Vector coherent_mode_vector(Index cutoff, Complex amp) {
  Vector v(cutoff + 1);
  double lf = 0.0;  // log n!
  for (Index nn = 0; nn <= cutoff; ++nn) {
    if (nn > 0) lf += std::log(double(nn));
    v(nn) = std::pow(amp, double(nn)) * std::exp(-0.5 * lf);
  }
  v *= std::exp(-0.5 * std::norm(amp));
  return v;
}

FockPure prepare_pure_impl(const FockBasis& b, const StatePreset& p) {
  p.validate();
  if (b.n_modes() != p.n_modes)
    throw std::invalid_argument("prepare: basis/preset mode count mismatch");
  const Index n = b.n_modes();
  Vector psi = Vector::Zero(b.dim());
  switch (p.kind) {
    case StatePreset::Kind::Vacuum: {
      psi(0) = 1.0;
      return {&b, psi};
    }
    case StatePreset::Kind::Fock: {
      Index idx = basis_index(b, p.occupations);
      if (idx < 0) throw std::invalid_argument("prepare: occupation exceeds cutoff");
      psi(idx) = 1.0;
      return {&b, psi};
    }
    case StatePreset::Kind::Coherent: {
      std::vector<Vector> per(n);
      for (Index k = 0; k < n; ++k) per[k] = coherent_mode_vector(b.cutoffs()[k], p.amplitudes(k));
      for (Index idx = 0; idx < b.dim(); ++idx) {
        Complex amp = 1.0;
        for (Index k = 0; k < n; ++k) amp *= per[k](b.occupation(idx, k));
        psi(idx) = amp;
      }
      psi.normalize();
      return {&b, psi};
    }
    case StatePreset::Kind::SinglePhotonSplit: {
      std::vector<Index> occ(n, 0);
      occ[p.pair[0]] = 1;
      psi(basis_index(b, occ)) = 1.0 / std::sqrt(2.0);
      occ[p.pair[0]] = 0;
      occ[p.pair[1]] = 1;
      psi(basis_index(b, occ)) += 1.0 / std::sqrt(2.0);
      return {&b, psi};
    }
    case StatePreset::Kind::Bsv: {
      // two independently squeezed pairs (m1,m4): +gain, (m2,m3): -gain
      auto [m1, m2, m3, m4] = p.quad;
      double t = std::tanh(p.gain);
      Index c14 = std::min(b.cutoffs()[m1], b.cutoffs()[m4]);
      Index c23 = std::min(b.cutoffs()[m2], b.cutoffs()[m3]);
      std::vector<Index> occ(n, 0);
      for (Index na = 0; na <= c14; ++na)
        for (Index nb = 0; nb <= c23; ++nb) {
          occ.assign(n, 0);
          occ[m1] = na;
          occ[m4] = na;
          occ[m2] = nb;
          occ[m3] = nb;
          Index idx = basis_index(b, occ);
          psi(idx) = std::pow(t, double(na)) * std::pow(-t, double(nb));
        }
      psi.normalize();
      return {&b, psi};
    }
    case StatePreset::Kind::SinglePhotonWeakHomodyne: {
      auto [m1, m2, m3, m4] = p.quad;
      Vector lo2 = coherent_mode_vector(b.cutoffs()[m2], p.alpha);
      Vector lo4 = coherent_mode_vector(b.cutoffs()[m4], p.alpha);
      for (Index idx = 0; idx < b.dim(); ++idx) {
        Index o1 = b.occupation(idx, m1), o3 = b.occupation(idx, m3);
        bool others_vac = true;
        for (Index k = 0; k < n; ++k)
          if (k != m1 && k != m2 && k != m3 && k != m4 && b.occupation(idx, k) != 0)
            others_vac = false;
        if (!others_vac) continue;
        Complex lo = lo2(b.occupation(idx, m2)) * lo4(b.occupation(idx, m4));
        if (o1 == 1 && o3 == 0)
          psi(idx) = lo / std::sqrt(2.0);
        else if (o1 == 0 && o3 == 1)
          psi(idx) = lo / std::sqrt(2.0);
      }
      psi.normalize();
      return {&b, psi};
    }
    case StatePreset::Kind::Thermal:
      throw std::invalid_argument("prepare_pure: thermal state is mixed");
  }
  throw std::logic_error("prepare_pure: unreachable");
}

}  // namespace

FockPure prepare_pure(const FockBasis& basis, const StatePreset& preset) {
  return prepare_pure_impl(basis, preset);
}

FockState prepare(const FockBasis& basis, const StatePreset& preset) {
  if (preset.kind == StatePreset::Kind::Thermal) {
    if (basis.dim() > kMaxDensityDim)
      throw std::invalid_argument("prepare: basis dimension exceeds the density-matrix bound");
    Vector diag = Vector::Zero(basis.dim());
    for (Index idx = 0; idx < basis.dim(); ++idx) {
      double w = 1.0;
      for (Index k = 0; k < basis.n_modes(); ++k) {
        double nb = preset.nbar[k];
        double occ = double(basis.occupation(idx, k));
        w *= std::pow(nb / (nb + 1.0), occ) / (nb + 1.0);
      }
      diag(idx) = w;
    }
    diag /= diag.sum().real();
    FockState s{&basis, Matrix(diag.asDiagonal())};
    return s;
  }
  return prepare_pure_impl(basis, preset).to_density();
}

namespace {

template <class Expect>
ReducedState reduce_impl(const FockBasis& b, Expect&& ex) {
  const Index n = b.n_modes();
  ReducedState s = ReducedState::vacuum(n);
  for (Index k = 0; k < n; ++k) {
    s.alpha(k) = ex(SparseMatrix(b.a(k)));
    for (Index kp = 0; kp < n; ++kp) {
      s.rho(k, kp) = ex(SparseMatrix(b.adag(kp) * b.a(k)));
      s.r(k, kp) = ex(SparseMatrix(b.a(kp) * b.a(k)));
    }
  }
  for (Index k2 = 0; k2 < n; ++k2)
    for (Index k3 = 0; k3 < n; ++k3) {
      SparseMatrix tail = SparseMatrix(b.a(k2) * b.a(k3));
      for (Index k1 = 0; k1 < n; ++k1)
        s.beta(k2 * n + k3, k1) = ex(SparseMatrix(b.adag(k1) * tail));
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn) {
        SparseMatrix head = SparseMatrix(b.adag(nn) * b.a(i));
        for (Index mm = 0; mm < n; ++mm)
          s.rho4(i * n + j, nn * n + mm) =
              ex(SparseMatrix(head * SparseMatrix(b.adag(mm) * b.a(j))));
      }
  return s;
}

template <class Expect>
SecondOrderState reduce_second_impl(const FockBasis& b, Expect&& ex) {
  const Index n = b.n_modes();
  SecondOrderState s = SecondOrderState::extend(reduce_impl(b, ex));
  for (Index k2 = 0; k2 < n; ++k2)
    for (Index k4 = 0; k4 < n; ++k4)
      for (Index k1 = 0; k1 < n; ++k1)
        for (Index k3 = 0; k3 < n; ++k3) {
          s.m(k2 * n + k4, k1 * n + k3) = ex(SparseMatrix(
              SparseMatrix(b.adag(k1) * b.a(k2)) * SparseMatrix(b.a(k3) * b.a(k4))));
          s.q(k2 * n + k4, k1 * n + k3) = ex(SparseMatrix(
              SparseMatrix(b.a(k1) * b.a(k2)) * SparseMatrix(b.a(k3) * b.a(k4))));
        }
  for (Index k2 = 0; k2 < n; ++k2)
    for (Index k3 = 0; k3 < n; ++k3)
      for (Index k1 = 0; k1 < n; ++k1)
        s.zeta(k2 * n + k3, k1) =
            ex(SparseMatrix(b.a(k1) * SparseMatrix(b.a(k2) * b.a(k3))));
  return s;
}

void warn_leak(double leak, double threshold, const char* what) {
  if (leak > threshold)
    std::cerr << "[rsf] warning: " << what << ": cutoff leakage " << leak
              << " exceeds " << threshold << "; moments may be truncated\n";
}

// tr(rho * op) over the sparse pattern of op
Complex trace_product(const Matrix& rho, const SparseMatrix& op) {
  Complex acc = 0;
  for (int col = 0; col < op.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(op, col); it; ++it)
      acc += rho(it.col(), it.row()) * it.value();
  return acc;
}

}  // namespace

ReducedState reduce_from_fock(const FockState& f, double leak_warn) {
  warn_leak(f.cutoff_leakage(), leak_warn, "reduce_from_fock");
  return reduce_impl(*f.basis, [&](const SparseMatrix& op) -> Complex {
    return trace_product(f.rho, op);
  });
}

ReducedState reduce_from_fock(const FockPure& f, double leak_warn) {
  warn_leak(f.cutoff_leakage(), leak_warn, "reduce_from_fock");
  return reduce_impl(*f.basis, [&](const SparseMatrix& op) -> Complex {
    return f.psi.dot(op * f.psi);
  });
}

SecondOrderState reduce_second_from_fock(const FockState& f, double leak_warn) {
  warn_leak(f.cutoff_leakage(), leak_warn, "reduce_second_from_fock");
  return reduce_second_impl(*f.basis, [&](const SparseMatrix& op) -> Complex {
    return trace_product(f.rho, op);
  });
}

SecondOrderState reduce_second_from_fock(const FockPure& f, double leak_warn) {
  warn_leak(f.cutoff_leakage(), leak_warn, "reduce_second_from_fock");
  return reduce_second_impl(*f.basis, [&](const SparseMatrix& op) -> Complex {
    return f.psi.dot(op * f.psi);
  });
}

}  // namespace rsf
