#include <doctest.h>

#include <cmath>
#include <random>

#include "rsf/entanglement.hpp"
#include "rsf/errors.hpp"
#include "rsf/reduced_state.hpp"
#include "rsf/state_factory.hpp"

using namespace rsf;

namespace {

Matrix random_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix h(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) h(i, j) = Complex(gauss(rng), gauss(rng));
  h = (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phase = (kI * es.eigenvalues().cast<Complex>().array()).exp().matrix();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("swap matrix basics") {
  CHECK(swap_matrix(1)(0, 0) == Complex(1.0));

  Matrix t2 = swap_matrix(2);
  // exchanges |0,1> and |1,0>, fixes |0,0> and |1,1>
  CHECK(t2(0, 0) == Complex(1.0));
  CHECK(t2(3, 3) == Complex(1.0));
  CHECK(t2(1, 2) == Complex(1.0));
  CHECK(t2(2, 1) == Complex(1.0));
  CHECK(t2(1, 1) == Complex(0.0));

  Matrix t3 = swap_matrix(3);
  CHECK((t3 * t3 - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t3 - t3.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t3 - t3.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tau operators act as pair swaps") {
  Matrix id = Matrix::Identity(9, 9);
  CHECK((tau_left(id) - swap_matrix(3)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Matrix o(9, 4);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 4; ++j) o(i, j) = Complex(gauss(rng), gauss(rng));
  CHECK((tau_left(tau_left(o)) - o).cwiseAbs().maxCoeff() == 0.0);
  CHECK((tau_right(tau_right(o.transpose())) - o.transpose()).cwiseAbs().maxCoeff() ==
        0.0);

  // pair swap on the two-photon state |1,0> x |0,1> exchanges the occupied rows
  ReducedState a = build(StatePreset::fock({1, 0}));
  ReducedState b = build(StatePreset::fock({0, 1}));
  ReducedState prod = compose_product(a, b);  // modes (1,0,0,1) over 4 modes
  Matrix swapped = tau_left(prod.rho4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index c = 0; c < 16; ++c)
        CHECK(swapped(i * 4 + j, c) == prod.rho4(j * 4 + i, c));

  CHECK_THROWS_AS(tau_left(Matrix::Zero(6, 6)), std::invalid_argument);
}

TEST_CASE("partial transpose properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;

  // product state: sigma_a (x) sigma_b -> sigma_a (x) sigma_b^T, same spectrum
  Matrix sa(2, 2), sb(2, 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      sa(i, j) = Complex(gauss(rng), gauss(rng));
      sb(i, j) = Complex(gauss(rng), gauss(rng));
    }
  sa = (sa * sa.adjoint()).eval();
  sb = (sb * sb.adjoint()).eval();
  sa /= sa.trace();
  sb /= sb.trace();
  TwoQuditState s{2, 2, kron(sa, sb), Complex(1.0)};
  Matrix pt = partial_transpose_second(s);
  CHECK((pt - kron(sa, sb.transpose())).cwiseAbs().maxCoeff() < 1e-15);
  // involution and trace preservation
  CHECK((partial_transpose_second(pt, 2, 2) - s.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(pt.trace() - s.matrix.trace()) < 1e-15);
  CHECK(hermiticity_defect(pt) < 1e-15);

  // maximally mixed is a fixed point
  TwoQuditState mm{2, 2, Matrix::Identity(4, 4) / 4.0, Complex(1.0)};
  CHECK((partial_transpose_second(mm) - mm.matrix).cwiseAbs().maxCoeff() == 0.0);

  // four-mode squeezed state: known negative eigenvalue of the transpose
  double gain = 1.0;
  auto rep = ppt_report(build(StatePreset::bsv(gain)), Bipartition({0, 1}, {2, 3}));
  CHECK(rep.min_eigenvalue ==
        doctest::Approx(1.0 / (1.0 - 3.0 * std::cosh(2.0 * gain))).epsilon(1e-12));
}

TEST_CASE("project_bipartition selects the cross block") {
  double g = 0.7;
  ReducedState bsv = build(StatePreset::bsv(g));
  Matrix p = project_bipartition(bsv, Bipartition({0, 1}, {2, 3}));
  double sh = std::sinh(g), ch = std::cosh(g);
  // basis order (1,3),(1,4),(2,3),(2,4)
  CHECK(p(0, 0).real() == doctest::Approx(std::pow(sh, 4)).epsilon(1e-12));
  CHECK(p(3, 3).real() == doctest::Approx(std::pow(sh, 4)).epsilon(1e-12));
  CHECK(p(1, 1).real() == doctest::Approx(sh * sh * std::cosh(2 * g)).epsilon(1e-12));
  CHECK(p(1, 2).real() == doctest::Approx(-sh * sh * ch * ch).epsilon(1e-12));
  CHECK(p(0, 1) == Complex(0.0));

  // vacuum projects to zero
  Matrix pv = project_bipartition(ReducedState::vacuum(4), Bipartition({0, 1}, {2, 3}));
  CHECK(pv.cwiseAbs().maxCoeff() == 0.0);

  // states with at most one boson in one party project to zero
  ReducedState one = build(StatePreset::single_photon_split({0, 1}, 4));
  Matrix p1 = project_bipartition(one, Bipartition({0, 1}, {2, 3}));
  CHECK(p1.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(project_bipartition(one, Bipartition({0, 5}, {2, 3})),
                  std::out_of_range);
}

TEST_CASE("normalize_projected records the cross correlator") {
  double g = 0.5;
  ReducedState bsv = build(StatePreset::bsv(g));
  Bipartition bp({0, 1}, {2, 3});
  auto s = normalize_projected(bsv, bp);
  double sh = std::sinh(g);
  double expect = 2 * std::pow(sh, 4) + 2 * sh * sh * std::cosh(2 * g);
  CHECK(s.trace_norm.real() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(s.matrix.trace() - Complex(1.0)) < 1e-12);

  CHECK_THROWS_AS(normalize_projected(Matrix::Zero(4, 4), 2, 2), TracelessState);

  Matrix unit = Matrix::Identity(4, 4) / 4.0;
  auto u = normalize_projected(unit, 2, 2);
  CHECK((u.matrix - unit).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("compose_product multiplies independent moments") {
  // vacuum (x) vacuum stays vacuum
  ReducedState v = compose_product(ReducedState::vacuum(2), ReducedState::vacuum(1));
  CHECK(v.max_abs() == 0.0);
  CHECK(v.n_modes == 3);

  // coherent pair: all blocks factorize analytically
  Vector a1(1), a2(1);
  a1(0) = Complex(0.4, 0.2);
  a2(0) = Complex(-0.3, 0.5);
  ReducedState c = compose_product(build(StatePreset::coherent(a1)),
                                   build(StatePreset::coherent(a2)));
  Vector both(2);
  both << a1(0), a2(0);
  ReducedState direct = build(StatePreset::coherent(both));
  CHECK((c.rho4 - direct.rho4).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.beta - direct.beta).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.rho - direct.rho).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.r - direct.r).cwiseAbs().maxCoeff() < 1e-14);
  // <n_1 n_2> with both modes occupied: |a1|^2 |a2|^2
  CHECK(c.rho4(0 * 2 + 1, 0 * 2 + 1).real() ==
        doctest::Approx(std::norm(a1(0)) * std::norm(a2(0))).epsilon(1e-12));

  CHECK_THROWS_AS(compose_product(ReducedState::vacuum(0), ReducedState::vacuum(0)),
                  std::exception);
}

TEST_CASE("expectation reduces additive observables") {
  double g = 0.6;
  ReducedState bsv = build(StatePreset::bsv(g));
  Matrix number = Matrix::Identity(4, 4);
  CHECK(expectation(bsv, number).real() ==
        doctest::Approx(4.0 * std::sinh(g) * std::sinh(g)).epsilon(1e-12));
  CHECK(expectation(bsv, Matrix::Zero(4, 4)) == Complex(0.0));

  // <n_1 n_3> through the fourth-order reduction
  Matrix o4 = Matrix::Zero(16, 16);
  o4(0 * 4 + 2, 0 * 4 + 2) = 1.0;  // |1,3><1,3| selector
  CHECK(expectation_fourth(bsv, o4).real() ==
        doctest::Approx(std::pow(std::sinh(g), 4)).epsilon(1e-12));

  CHECK_THROWS_AS(expectation(bsv, Matrix::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("projected blocks of physical states are positive") {
  Bipartition bp({0, 1}, {2, 3});
  std::vector<ReducedState> states;
  states.push_back(build(StatePreset::bsv(0.8)));
  states.push_back(build(StatePreset::single_photon_weak_homodyne(0.5)));
  states.push_back(build(StatePreset::thermal({0.2, 0.3, 0.4, 0.1})));
  Vector amps(4);
  amps << Complex(0.5, 0.1), Complex(0.2, 0), Complex(-0.3, 0.2), Complex(0, 0.4);
  states.push_back(build(StatePreset::coherent(amps)));
  for (const auto& s : states) {
    Matrix p = project_bipartition(s, bp);
    Eigen::SelfAdjointEigenSolver<Matrix> es((p + p.adjoint()) / 2.0);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(hermiticity_defect(p) < 1e-10);
    // occupations stay non-negative
    for (Index k = 0; k < 4; ++k) CHECK(s.rho(k, k).real() > -1e-12);
    // r stays symmetric
    CHECK((s.r - s.r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("separable products never show a negative transpose") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(0.05, 0.8);
  for (int trial = 0; trial < 5; ++trial) {
    ReducedState a = build(StatePreset::thermal({uni(rng), uni(rng)}));
    Vector amps(2);
    amps << Complex(uni(rng), uni(rng)), Complex(uni(rng), -uni(rng));
    ReducedState b = build(StatePreset::coherent(amps));
    ReducedState prod = compose_product(a, b);  // A modes {0,1}, B modes {2,3}
    auto rep = ppt_report(prod, Bipartition({0, 1}, {2, 3}));
    CHECK(rep.min_eigenvalue > -1e-10);
    CHECK(!rep.entangled);
  }
}

TEST_CASE("local basis change leaves the transpose spectrum unchanged") {
  std::mt19937_64 rng(23);
  ReducedState s = build(StatePreset::bsv(0.9));
  Bipartition bp({0, 1}, {2, 3});
  RealVector before = ppt_report(s, bp).eigenvalues;
  for (int trial = 0; trial < 3; ++trial) {
    Matrix ua = random_unitary(2, rng), ub = random_unitary(2, rng);
    Matrix u = Matrix::Zero(4, 4);
    u.block(0, 0, 2, 2) = ua;
    u.block(2, 2, 2, 2) = ub;
    RealVector after = ppt_report(apply_mode_unitary(s, u), bp).eigenvalues;
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-10);
  }
}
