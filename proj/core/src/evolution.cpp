#include "rsf/evolution.hpp"

#include <cmath>
#include <stdexcept>

#include "rsf/detail/rk4.hpp"
#include "rsf/errors.hpp"

namespace rsf {

ReducedState rhs(const ReducedState& s, const GeneratorSpec& g) {
  const Index n = s.n_modes;
  if (g.n_modes() != n) throw std::invalid_argument("rhs: generator dimension mismatch");
  if (g.has_squeezing())
    throw std::invalid_argument("rhs: squeezing generator requires the second-order integrator");

  const Matrix& h = g.h;
  const Matrix gu = g.gamma_up.size() ? g.gamma_up : Matrix::Zero(n, n);
  const Matrix gd = g.gamma_down.size() ? g.gamma_down : Matrix::Zero(n, n);
  const Matrix gg = gu - gd;
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix tau = swap_matrix(n);
  const bool pump = g.has_pump();

  ReducedState d = ReducedState::vacuum(n);

  // single-particle blocks
  d.alpha = -kI * (h * s.alpha) + 0.5 * (gg * s.alpha);
  d.rho = -kI * (h * s.rho - s.rho * h) + 0.5 * (gg * s.rho + s.rho * gg) + gu;
  Matrix half_r = -kI * (h * s.r) + 0.5 * (gg * s.r);
  if (pump) {
    d.alpha += g.xi;
    d.rho += g.xi * s.alpha.adjoint() + s.alpha * g.xi.adjoint();
    half_r += g.xi * s.alpha.transpose();
  }
  d.r = half_r + half_r.transpose();

  // pair blocks
  const Matrix h2 = kron(h, eye) + kron(eye, h);
  const Matrix k2 = kron(gg, eye) + kron(eye, gg);
  d.rho4 = -kI * (h2 * s.rho4 - s.rho4 * h2) + 0.5 * (k2 * s.rho4 + s.rho4 * k2);
  d.rho4 += tau * kron(s.rho, gd) + tau * kron(gu, s.rho) + kron(gu, s.rho) +
            kron(s.rho, gu) + tau * kron(gu, eye);
  d.beta = -kI * (h2 * s.beta - s.beta * h) +
           0.5 * ((kron(gg, eye) + kron(eye, gg)) * s.beta + s.beta * gg) +
           kron(gu, s.alpha) + tau * kron(gu, s.alpha);
  if (pump) {
    const Matrix xi_col = g.xi;
    const Matrix bdag = s.beta.adjoint();
    const Matrix p1 = kron(xi_col, bdag);
    const Matrix p2 = kron(s.beta, g.xi.adjoint());
    d.rho4 += p1 + tau * p1 + tau * kron(Matrix(g.xi * s.alpha.adjoint()), eye) +
              p2 + p2 * tau + kron(eye, Matrix(s.alpha * g.xi.adjoint())) * tau;
    d.beta += kron(s.rho, xi_col) + tau * kron(s.rho, xi_col) +
              vec_rowmajor(s.r) * g.xi.adjoint();
  }

  for (const auto& ch : g.scattering) {
    if (ch.kappa == 0.0) continue;
    const Matrix u2 = kron(ch.u, ch.u);
    d.alpha += ch.kappa * ((ch.u * s.alpha) - s.alpha);
    d.rho += ch.kappa * (ch.u * s.rho * ch.u.adjoint() - s.rho);
    d.r += ch.kappa * (ch.u * s.r * ch.u.transpose() - s.r);
    d.rho4 += ch.kappa * (u2 * s.rho4 * u2.adjoint() - s.rho4);
    d.beta += ch.kappa * (u2 * s.beta * ch.u.adjoint() - s.beta);
  }
  return d;
}

namespace {

Matrix restrict_block(const Matrix& m, const std::vector<Index>& rows,
                      const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

void require_local(const Matrix& m, const Bipartition& bp, const char* name) {
  if (m.size() == 0) return;
  double off = 0.0;
  for (Index ka : bp.set_a())
    for (Index kb : bp.set_b())
      off = std::max({off, std::abs(m(ka, kb)), std::abs(m(kb, ka))});
  if (off > kTol)
    throw NonlocalGenerator(std::string("generator matrix ") + name +
                            " couples the two parties");
}

}  // namespace

Matrix rhs_projected(const Matrix& p, const Matrix& rho, const GeneratorSpec& g,
                     const Bipartition& bp) {
  const auto& A = bp.set_a();
  const auto& B = bp.set_b();
  const Index da = bp.dim_a(), db = bp.dim_b();
  if (p.rows() != da * db || p.cols() != da * db)
    throw std::invalid_argument("rhs_projected: block dimension mismatch");
  if (g.has_pump())
    throw NonlocalGenerator("rhs_projected: coherent pump couples the block to beta; "
                            "the closed projected evolution requires xi = 0");
  if (g.has_squeezing())
    throw std::invalid_argument("rhs_projected: squeezing not supported");
  require_local(g.h, bp, "h");
  require_local(g.gamma_up, bp, "gamma_up");
  require_local(g.gamma_down, bp, "gamma_down");
  for (const auto& ch : g.scattering) require_local(ch.u, bp, "scattering u");

  const Index n = g.n_modes();
  const Matrix gu = g.gamma_up.size() ? g.gamma_up : Matrix::Zero(n, n);
  const Matrix gd = g.gamma_down.size() ? g.gamma_down : Matrix::Zero(n, n);
  const Matrix ha = restrict_block(g.h, A, A), hb = restrict_block(g.h, B, B);
  const Matrix gga = restrict_block(gu - gd, A, A), ggb = restrict_block(gu - gd, B, B);
  const Matrix ia = Matrix::Identity(da, da), ib = Matrix::Identity(db, db);

  const Matrix h2 = kron(ha, ib) + kron(ia, hb);
  const Matrix k2 = kron(gga, ib) + kron(ia, ggb);
  Matrix d = -kI * (h2 * p - p * h2) + 0.5 * (k2 * p + p * k2);
  // surviving gain terms: pair-diagonal delta terms vanish on the cross block
  d += kron(restrict_block(gu, A, A), restrict_block(rho, B, B)) +
       kron(restrict_block(rho, A, A), restrict_block(gu, B, B));
  for (const auto& ch : g.scattering) {
    if (ch.kappa == 0.0) continue;
    const Matrix u2 = kron(restrict_block(ch.u, A, A), restrict_block(ch.u, B, B));
    d += ch.kappa * (u2 * p * u2.adjoint() - p);
  }
  return d;
}

std::vector<double> uniform_grid(double t_max, int samples) {
  if (samples < 1) throw std::invalid_argument("uniform_grid: samples must be >= 1");
  std::vector<double> t(samples + 1);
  for (int i = 0; i <= samples; ++i) t[i] = t_max * i / samples;
  return t;
}

namespace {

struct SegmentCursor {
  const std::vector<Segment>& segments;
  std::size_t idx = 0;
  double seg_start = 0.0;

  double seg_end() const { return seg_start + segments[idx].duration; }
  const GeneratorSpec& gen() const { return segments[idx].generator; }
  bool advance_past(double t) {
    while (idx + 1 < segments.size() && t >= seg_end() - 1e-15) {
      seg_start = seg_end();
      ++idx;
    }
    return true;
  }
};

ReducedState advance_in_segments(ReducedState s, const std::vector<Segment>& segments,
                                 double t_from, double t_to, double dt_override) {
  if (segments.empty()) throw std::invalid_argument("integrate: no segments");
  SegmentCursor cur{segments};
  // fast-forward the cursor to t_from
  cur.advance_past(t_from);
  double t = t_from;
  while (t < t_to - 1e-12) {
    cur.advance_past(t);
    double stop = std::min(t_to, cur.seg_end());
    if (stop <= t + 1e-13) {
      // past the final segment: remaining time has no generator
      throw std::invalid_argument("integrate: grid extends past the last segment");
    }
    const GeneratorSpec& g = cur.gen();
    double dt = dt_override > 0.0 ? dt_override : g.default_step();
    s = detail::rk4_advance(std::move(s), t, stop, dt,
                            [&](const ReducedState& x) { return rhs(x, g); });
    if (s.has_nan())
      throw NumericalFailure("integrate: state became non-finite near t = " +
                             std::to_string(stop));
    t = stop;
  }
  return s;
}

}  // namespace

Trajectory integrate(const ReducedState& initial, const std::vector<Segment>& segments,
                     const std::vector<double>& t_grid, const IntegrateOptions& opts) {
  if (t_grid.empty()) throw std::invalid_argument("integrate: empty grid");
  double total = 0.0;
  for (const auto& seg : segments) {
    if (seg.duration < 0) throw std::invalid_argument("integrate: negative duration");
    seg.generator.validate();
    total += seg.duration;
  }
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (t_grid[i + 1] < t_grid[i])
      throw std::invalid_argument("integrate: grid times must be non-decreasing");
  if (t_grid.front() < 0 || t_grid.back() > total + 1e-12)
    throw std::invalid_argument("integrate: grid outside [0, total duration]");

  Trajectory traj;
  traj.segments = segments;
  ReducedState s = initial;
  double t = 0.0;
  for (double tg : t_grid) {
    s = advance_in_segments(std::move(s), segments, t, tg, opts.dt);
    t = tg;
    traj.times.push_back(tg);
    traj.states.push_back(s);
  }
  return traj;
}

Trajectory integrate(const ReducedState& initial, const GeneratorSpec& g,
                     const std::vector<double>& t_grid, const IntegrateOptions& opts) {
  double t_max = t_grid.empty() ? 0.0 : t_grid.back();
  return integrate(initial, {Segment{g, t_max}}, t_grid, opts);
}

ReducedState integrate_between(const ReducedState& from, const std::vector<Segment>& segments,
                               double t_from, double t_to, const IntegrateOptions& opts) {
  return advance_in_segments(from, segments, t_from, t_to, opts.dt);
}

}  // namespace rsf
