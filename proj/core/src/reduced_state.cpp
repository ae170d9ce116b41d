#include "rsf/reduced_state.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rsf {

ReducedState ReducedState::vacuum(Index n) {
  ReducedState s;
  s.n_modes = n;
  s.rho = Matrix::Zero(n, n);
  s.alpha = Vector::Zero(n);
  s.r = Matrix::Zero(n, n);
  s.rho4 = Matrix::Zero(n * n, n * n);
  s.beta = Matrix::Zero(n * n, n);
  return s;
}

ReducedState& ReducedState::operator+=(const ReducedState& o) {
  rho += o.rho;
  alpha += o.alpha;
  r += o.r;
  rho4 += o.rho4;
  beta += o.beta;
  return *this;
}

ReducedState ReducedState::operator+(const ReducedState& o) const {
  ReducedState out = *this;
  out += o;
  return out;
}

ReducedState ReducedState::operator*(double s) const { return (*this) * Complex(s); }

ReducedState ReducedState::operator*(Complex s) const {
  ReducedState out = *this;
  out.rho *= s;
  out.alpha *= s;
  out.r *= s;
  out.rho4 *= s;
  out.beta *= s;
  return out;
}

double ReducedState::max_abs() const {
  double m = 0.0;
  m = std::max(m, rho.size() ? rho.cwiseAbs().maxCoeff() : 0.0);
  m = std::max(m, alpha.size() ? alpha.cwiseAbs().maxCoeff() : 0.0);
  m = std::max(m, r.size() ? r.cwiseAbs().maxCoeff() : 0.0);
  m = std::max(m, rho4.size() ? rho4.cwiseAbs().maxCoeff() : 0.0);
  m = std::max(m, beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0);
  return m;
}

bool ReducedState::has_nan() const {
  auto bad = [](const Matrix& m) { return !m.allFinite(); };
  return bad(rho) || !alpha.allFinite() || bad(r) || bad(rho4) || bad(beta);
}

namespace {
std::vector<Index> sorted_unique(std::vector<Index> v, const char* name) {
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end())
    throw std::invalid_argument(std::string("bipartition set ") + name +
                                " contains duplicate modes");
  if (v.empty())
    throw std::invalid_argument(std::string("bipartition set ") + name + " is empty");
  if (v.front() < 0)
    throw std::invalid_argument(std::string("bipartition set ") + name +
                                " contains a negative mode index");
  return v;
}
}  // namespace

Bipartition::Bipartition(std::vector<Index> set_a, std::vector<Index> set_b)
    : a_(sorted_unique(std::move(set_a), "A")), b_(sorted_unique(std::move(set_b), "B")) {
  std::set<Index> sa(a_.begin(), a_.end());
  for (Index m : b_)
    if (sa.count(m)) throw std::invalid_argument("bipartition sets overlap");
}

Index Bipartition::max_mode() const { return std::max(a_.back(), b_.back()); }

Matrix swap_matrix(Index d) {
  if (d < 1) throw std::invalid_argument("swap_matrix: dimension must be >= 1");
  Matrix t = Matrix::Zero(d * d, d * d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) t(a * d + b, b * d + a) = 1.0;
  return t;
}

namespace {
Index pair_root(Index sq, const char* what) {
  auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(sq))));
  if (d * d != sq)
    throw std::invalid_argument(std::string(what) + ": dimension is not a perfect square");
  return d;
}
}  // namespace

Matrix tau_left(const Matrix& o) {
  Index d = pair_root(o.rows(), "tau_left");
  Matrix out(o.rows(), o.cols());
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) out.row(a * d + b) = o.row(b * d + a);
  return out;
}

Matrix tau_right(const Matrix& o) {
  Index d = pair_root(o.cols(), "tau_right");
  Matrix out(o.rows(), o.cols());
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) out.col(a * d + b) = o.col(b * d + a);
  return out;
}

Matrix partial_transpose_second(const Matrix& m, Index dim_a, Index dim_b) {
  if (m.rows() != m.cols() || m.rows() != dim_a * dim_b)
    throw std::invalid_argument("partial_transpose_second: dimension mismatch");
  Matrix out(m.rows(), m.cols());
  for (Index a = 0; a < dim_a; ++a)
    for (Index b = 0; b < dim_b; ++b)
      for (Index ap = 0; ap < dim_a; ++ap)
        for (Index bp = 0; bp < dim_b; ++bp)
          out(a * dim_b + b, ap * dim_b + bp) = m(a * dim_b + bp, ap * dim_b + b);
  return out;
}

Matrix partial_transpose_second(const TwoQuditState& s) {
  return partial_transpose_second(s.matrix, s.dim_a, s.dim_b);
}

Matrix project_bipartition(const ReducedState& rs, const Bipartition& bp) {
  const Index n = rs.n_modes;
  if (bp.max_mode() >= n)
    throw std::out_of_range("project_bipartition: bipartition index out of range");
  const auto& A = bp.set_a();
  const auto& B = bp.set_b();
  const Index da = bp.dim_a(), db = bp.dim_b();
  Matrix out(da * db, da * db);
  for (Index ia = 0; ia < da; ++ia)
    for (Index jb = 0; jb < db; ++jb)
      for (Index na = 0; na < da; ++na)
        for (Index mb = 0; mb < db; ++mb)
          out(ia * db + jb, na * db + mb) =
              rs.rho4(A[ia] * n + B[jb], A[na] * n + B[mb]);
  return out;
}

TwoQuditState normalize_projected(const Matrix& m, Index dim_a, Index dim_b,
                                  double tol_trace) {
  if (m.rows() != m.cols()) throw std::invalid_argument("normalize_projected: not square");
  if (m.rows() != dim_a * dim_b)
    throw std::invalid_argument("normalize_projected: dims do not match matrix size");
  Complex tr = m.trace();
  if (std::abs(tr) <= tol_trace)
    throw TracelessState("projected block is traceless; cross-party number "
                         "correlations vanish for this state");
  TwoQuditState s;
  s.dim_a = dim_a;
  s.dim_b = dim_b;
  s.matrix = m / tr;
  s.trace_norm = tr;
  return s;
}

TwoQuditState normalize_projected(const ReducedState& rs, const Bipartition& bp,
                                  double tol_trace) {
  return normalize_projected(project_bipartition(rs, bp), bp.dim_a(), bp.dim_b(),
                             tol_trace);
}

namespace {

// Expectation of an ordered list of ladder operators taken within one factor
// of a product state, expressed through that factor's reduced blocks.
// Each op is (mode, dagger) in original left-to-right order; at most four ops,
// at most two daggers (the patterns occurring inside fourth moments).
struct Op {
  Index mode;
  bool dagger;
};

Complex factor_moment(const ReducedState& s, const std::vector<Op>& ops) {
  const Index n = s.n_modes;
  switch (ops.size()) {
    case 0:
      return 1.0;
    case 1:
      return ops[0].dagger ? std::conj(s.alpha(ops[0].mode)) : s.alpha(ops[0].mode);
    case 2: {
      auto [k1, d1] = ops[0];
      auto [k2, d2] = ops[1];
      if (d1 && !d2) return s.rho(k2, k1);                       // a^+ a
      if (!d1 && d2) return s.rho(k1, k2) + (k1 == k2 ? 1.0 : 0.0);  // a a^+
      if (!d1 && !d2) return s.r(k1, k2);                        // a a
      return std::conj(s.r(k1, k2));                             // a^+ a^+
    }
    case 3: {
      // one dagger among three ops; normal order and read off beta/alpha
      auto dag_at = [&](int i) { return ops[i].dagger; };
      Index k0 = ops[0].mode, k1 = ops[1].mode, k2 = ops[2].mode;
      if (dag_at(0) && !dag_at(1) && !dag_at(2)) {
        return s.beta(k1 * n + k2, k0);  // a^+ a a
      }
      if (!dag_at(0) && dag_at(1) && !dag_at(2)) {
        // a_k0 a_k1^+ a_k2 = a_k1^+ a_k0 a_k2 + d(k0,k1) a_k2
        return s.beta(k0 * n + k2, k1) + (k0 == k1 ? s.alpha(k2) : 0.0);
      }
      if (!dag_at(0) && !dag_at(1) && dag_at(2)) {
        // a_k0 a_k1 a_k2^+ = a_k2^+ a_k0 a_k1 + d(k1,k2) a_k0 + d(k0,k2) a_k1
        return s.beta(k0 * n + k1, k2) + (k1 == k2 ? s.alpha(k0) : 0.0) +
               (k0 == k2 ? s.alpha(k1) : 0.0);
      }
      // two daggers, one annihilation: conjugate of the mirrored pattern
      std::vector<Op> mirror;
      for (auto it = ops.rbegin(); it != ops.rend(); ++it)
        mirror.push_back({it->mode, !it->dagger});
      return std::conj(factor_moment(s, mirror));
    }
    case 4: {
      // the only pattern reaching four ops in one factor is a^+ a a^+ a
      return s.rho4(ops[1].mode * n + ops[3].mode, ops[0].mode * n + ops[2].mode);
    }
    default:
      throw std::logic_error("factor_moment: unsupported operator string");
  }
}

}  // namespace

ReducedState compose_product(const ReducedState& a, const ReducedState& b) {
  const Index na = a.n_modes, nb = b.n_modes, n = na + nb;
  if (na < 1 || nb < 1)
    throw std::invalid_argument("compose_product: factors must have at least one mode");
  ReducedState t = ReducedState::vacuum(n);

  auto in_a = [&](Index k) { return k < na; };
  // evaluate an ordered ladder-operator string on the product state by
  // splitting it into the two factors (same-factor order preserved)
  auto moment = [&](std::initializer_list<Op> ops_global) -> Complex {
    std::vector<Op> oa, ob;
    for (const Op& op : ops_global) {
      if (in_a(op.mode))
        oa.push_back(op);
      else
        ob.push_back({op.mode - na, op.dagger});
    }
    return factor_moment(a, oa) * factor_moment(b, ob);
  };

  for (Index k = 0; k < n; ++k)
    t.alpha(k) = in_a(k) ? a.alpha(k) : b.alpha(k - na);
  for (Index k = 0; k < n; ++k)
    for (Index kp = 0; kp < n; ++kp) {
      t.rho(k, kp) = moment({{kp, true}, {k, false}});
      t.r(k, kp) = moment({{kp, false}, {k, false}});
    }
  for (Index k2 = 0; k2 < n; ++k2)
    for (Index k3 = 0; k3 < n; ++k3)
      for (Index k1 = 0; k1 < n; ++k1)
        t.beta(k2 * n + k3, k1) = moment({{k1, true}, {k2, false}, {k3, false}});
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index nn = 0; nn < n; ++nn)
        for (Index mm = 0; mm < n; ++mm)
          t.rho4(i * n + j, nn * n + mm) =
              moment({{nn, true}, {i, false}, {mm, true}, {j, false}});
  return t;
}

Complex expectation(const ReducedState& rs, const Matrix& o) {
  if (o.rows() != rs.n_modes || o.cols() != rs.n_modes)
    throw std::invalid_argument("expectation: observable rank mismatch");
  return (rs.rho * o).trace();
}

Complex expectation_fourth(const ReducedState& rs, const Matrix& o4) {
  if (o4.rows() != rs.n_modes * rs.n_modes || o4.cols() != o4.rows())
    throw std::invalid_argument("expectation_fourth: observable rank mismatch");
  return (rs.rho4 * o4).trace();
}

ReducedState apply_mode_matrix(const ReducedState& rs, const Matrix& u) {
  if (u.rows() != rs.n_modes || u.cols() != rs.n_modes)
    throw std::invalid_argument("apply_mode_matrix: dimension mismatch");
  ReducedState out;
  out.n_modes = rs.n_modes;
  Matrix u2 = kron(u, u);
  out.rho = u * rs.rho * u.adjoint();
  out.alpha = u * rs.alpha;
  out.r = u * rs.r * u.transpose();
  out.rho4 = u2 * rs.rho4 * u2.adjoint();
  out.beta = u2 * rs.beta * u.adjoint();
  return out;
}

ReducedState apply_mode_unitary(const ReducedState& rs, const Matrix& u, double tol) {
  if (!is_unitary(u, tol))
    throw std::invalid_argument("apply_mode_unitary: matrix is not unitary");
  return apply_mode_matrix(rs, u);
}

}  // namespace rsf
