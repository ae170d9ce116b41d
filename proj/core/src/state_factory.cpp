#include "rsf/state_factory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rsf {

// ---- preset constructors ----------------------------------------------------

StatePreset StatePreset::vacuum(Index n) {
  StatePreset p;
  p.kind = Kind::Vacuum;
  p.n_modes = n;
  return p;
}

StatePreset StatePreset::fock(std::vector<Index> occ) {
  StatePreset p;
  p.kind = Kind::Fock;
  p.n_modes = static_cast<Index>(occ.size());
  p.occupations = std::move(occ);
  return p;
}

StatePreset StatePreset::coherent(Vector amps) {
  StatePreset p;
  p.kind = Kind::Coherent;
  p.n_modes = amps.size();
  p.amplitudes = std::move(amps);
  return p;
}

StatePreset StatePreset::thermal(std::vector<double> nbar) {
  StatePreset p;
  p.kind = Kind::Thermal;
  p.n_modes = static_cast<Index>(nbar.size());
  p.nbar = std::move(nbar);
  return p;
}

StatePreset StatePreset::bsv(double gain, std::array<Index, 4> quad, Index n_modes) {
  StatePreset p;
  p.kind = Kind::Bsv;
  p.n_modes = n_modes;
  p.gain = gain;
  p.quad = quad;
  return p;
}

StatePreset StatePreset::single_photon_split(std::array<Index, 2> pair, Index n_modes) {
  StatePreset p;
  p.kind = Kind::SinglePhotonSplit;
  p.n_modes = n_modes;
  p.pair = pair;
  return p;
}

StatePreset StatePreset::single_photon_weak_homodyne(double alpha,
                                                     std::array<Index, 4> quad,
                                                     Index n_modes) {
  StatePreset p;
  p.kind = Kind::SinglePhotonWeakHomodyne;
  p.n_modes = n_modes;
  p.alpha = alpha;
  p.quad = quad;
  return p;
}

void StatePreset::validate() const {
  if (n_modes < 1) throw std::invalid_argument("preset: n_modes must be >= 1");
  auto check_modes = [&](auto begin, auto end) {
    std::set<Index> seen;
    for (auto it = begin; it != end; ++it) {
      if (*it < 0 || *it >= n_modes)
        throw std::invalid_argument("preset: mode index out of range");
      if (!seen.insert(*it).second)
        throw std::invalid_argument("preset: repeated mode index");
    }
  };
  switch (kind) {
    case Kind::Vacuum:
      break;
    case Kind::Fock:
      if (static_cast<Index>(occupations.size()) != n_modes)
        throw std::invalid_argument("preset: one occupation per mode required");
      for (Index o : occupations)
        if (o < 0) throw std::invalid_argument("preset: negative occupation");
      break;
    case Kind::Coherent:
      if (amplitudes.size() != n_modes)
        throw std::invalid_argument("preset: one amplitude per mode required");
      break;
    case Kind::Thermal:
      if (static_cast<Index>(nbar.size()) != n_modes)
        throw std::invalid_argument("preset: one occupation per mode required");
      for (double v : nbar)
        if (v < 0) throw std::invalid_argument("preset: nbar must be >= 0");
      break;
    case Kind::Bsv:
      if (gain < 0) throw std::invalid_argument("preset: gain must be >= 0");
      if (n_modes < 4) throw std::invalid_argument("preset: four modes required");
      check_modes(quad.begin(), quad.end());
      break;
    case Kind::SinglePhotonSplit:
      if (n_modes < 2) throw std::invalid_argument("preset: two modes required");
      check_modes(pair.begin(), pair.end());
      break;
    case Kind::SinglePhotonWeakHomodyne:
      if (n_modes < 4) throw std::invalid_argument("preset: four modes required");
      if (alpha <= 0)
        throw std::invalid_argument("preset: local oscillator amplitude must be > 0");
      check_modes(quad.begin(), quad.end());
      break;
  }
}

// ---- analytic builders -------------------------------------------------------

Matrix mode_permutation(const std::vector<Index>& src) {
  const Index n = static_cast<Index>(src.size());
  Matrix u = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) u(k, src[k]) = 1.0;
  if (!is_unitary(u)) throw std::invalid_argument("mode_permutation: not a permutation");
  return u;
}

ReducedState tmsv_reduced(double gain) {
  ReducedState s = ReducedState::vacuum(2);
  const double sh = std::sinh(gain), ch = std::cosh(gain);
  const double n = sh * sh;
  s.rho.diagonal().setConstant(n);
  s.r(0, 1) = s.r(1, 0) = sh * ch;
  // normal-ordered fourth moments: <n^2> of a geometric distribution and the
  // pair correlator; everything else vanishes by pairwise number matching
  const double g_same = 2.0 * n * n;          // < a_x^+ a_x^+ a_x a_x >
  const double g_cross = 2.0 * n * n + n;     // < a_x^+ a_y^+ a_x a_y >
  auto G = [&](Index i, Index j, Index nn, Index mm) -> double {
    if (i == j && j == nn && nn == mm) return g_same;
    if (i != j && ((nn == i && mm == j) || (nn == j && mm == i))) return g_cross;
    return 0.0;
  };
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index nn = 0; nn < 2; ++nn)
        for (Index mm = 0; mm < 2; ++mm)
          s.rho4(i * 2 + j, nn * 2 + mm) =
              G(i, j, nn, mm) + (i == mm ? s.rho(j, nn) : Complex(0));
  return s;
}

namespace {

ReducedState build_fock(const StatePreset& p) {
  const Index n = p.n_modes;
  ReducedState s = ReducedState::vacuum(n);
  for (Index k = 0; k < n; ++k) s.rho(k, k) = double(p.occupations[k]);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn)
        for (Index mm = 0; mm < n; ++mm) {
          double ni = double(p.occupations[i]), nj = double(p.occupations[j]);
          double g = 0.0;
          if (i == j && j == nn && nn == mm)
            g = ni * (ni - 1.0);
          else if (i != j && ((nn == i && mm == j) || (nn == j && mm == i)))
            g = ni * nj;
          s.rho4(i * n + j, nn * n + mm) =
              g + ((i == mm && j == nn) ? nj : 0.0);
        }
  return s;
}

ReducedState build_coherent(const StatePreset& p) {
  const Index n = p.n_modes;
  const Vector& a = p.amplitudes;
  ReducedState s = ReducedState::vacuum(n);
  s.alpha = a;
  for (Index k = 0; k < n; ++k)
    for (Index kp = 0; kp < n; ++kp) {
      s.rho(k, kp) = a(k) * std::conj(a(kp));
      s.r(k, kp) = a(k) * a(kp);
    }
  for (Index k2 = 0; k2 < n; ++k2)
    for (Index k3 = 0; k3 < n; ++k3)
      for (Index k1 = 0; k1 < n; ++k1)
        s.beta(k2 * n + k3, k1) = std::conj(a(k1)) * a(k2) * a(k3);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn)
        for (Index mm = 0; mm < n; ++mm)
          s.rho4(i * n + j, nn * n + mm) =
              std::conj(a(nn)) * std::conj(a(mm)) * a(i) * a(j) +
              (i == mm ? std::conj(a(nn)) * a(j) : Complex(0));
  return s;
}

ReducedState build_thermal(const StatePreset& p) {
  const Index n = p.n_modes;
  ReducedState s = ReducedState::vacuum(n);
  for (Index k = 0; k < n; ++k) s.rho(k, k) = p.nbar[k];
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn)
        for (Index mm = 0; mm < n; ++mm) {
          double ni = p.nbar[i], nj = p.nbar[j];
          Complex v = 0.0;
          if (nn == i && mm == j) v += ni * nj;
          if (nn == j && mm == i) v += ni * nj;
          if (i == mm && j == nn) v += nj;
          s.rho4(i * n + j, nn * n + mm) = v;
        }
  return s;
}

ReducedState build_single_photon_split(const StatePreset& p) {
  const Index n = p.n_modes;
  ReducedState s = ReducedState::vacuum(n);
  for (Index k : p.pair)
    for (Index kp : p.pair) s.rho(k, kp) = 0.5;
  // at most one photon in total: the fourth moments carry only the
  // reordering term delta(i,m) rho(j,n)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn)
        s.rho4(i * n + j, nn * n + i) = s.rho(j, nn);
  return s;
}

ReducedState embed_with_vacuum(const ReducedState& s, Index n_total) {
  if (s.n_modes == n_total) return s;
  return compose_product(s, ReducedState::vacuum(n_total - s.n_modes));
}

// composed factors live at positions 0..k-1; route position j to mode dst[j]
ReducedState place_modes(const ReducedState& s, const std::vector<Index>& dst) {
  std::vector<Index> src(s.n_modes, -1);
  for (Index pos = 0; pos < static_cast<Index>(dst.size()); ++pos) src[dst[pos]] = pos;
  std::vector<Index> rest;
  for (Index k = 0; k < s.n_modes; ++k)
    if (std::find(dst.begin(), dst.end(), k) == dst.end()) rest.push_back(k);
  Index next = static_cast<Index>(dst.size());
  for (Index k : rest) src[k] = next++;
  return apply_mode_unitary(s, mode_permutation(src));
}

}  // namespace

ReducedState build(const StatePreset& p) {
  p.validate();
  switch (p.kind) {
    case StatePreset::Kind::Vacuum:
      return ReducedState::vacuum(p.n_modes);
    case StatePreset::Kind::Fock:
      return build_fock(p);
    case StatePreset::Kind::Coherent:
      return build_coherent(p);
    case StatePreset::Kind::Thermal:
      return build_thermal(p);
    case StatePreset::Kind::SinglePhotonSplit:
      return build_single_photon_split(p);
    case StatePreset::Kind::Bsv: {
      ReducedState pairs = compose_product(tmsv_reduced(p.gain), tmsv_reduced(-p.gain));
      ReducedState full = embed_with_vacuum(pairs, p.n_modes);
      // composed order: (pairA+, pairA-, pairB+, pairB-) -> (m1,m4,m2,m3)
      return place_modes(full, {p.quad[0], p.quad[3], p.quad[1], p.quad[2]});
    }
    case StatePreset::Kind::SinglePhotonWeakHomodyne: {
      StatePreset split = StatePreset::single_photon_split({0, 1}, 2);
      Vector lo(1);
      lo(0) = p.alpha;
      ReducedState core = compose_product(
          compose_product(build(split), build(StatePreset::coherent(lo))),
          build(StatePreset::coherent(lo)));
      ReducedState full = embed_with_vacuum(core, p.n_modes);
      // composed order: (signalA, signalB, loA, loB) -> (m1, m3, m2, m4)
      return place_modes(full, {p.quad[0], p.quad[2], p.quad[1], p.quad[3]});
    }
  }
  throw std::logic_error("build: unreachable");
}

}  // namespace rsf
