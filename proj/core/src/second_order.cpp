#include "rsf/second_order.hpp"

#include <cmath>
#include <stdexcept>

#include "rsf/detail/rk4.hpp"
#include "rsf/errors.hpp"

namespace rsf {

SecondOrderState SecondOrderState::vacuum(Index n) {
  return extend(ReducedState::vacuum(n));
}

SecondOrderState SecondOrderState::extend(const ReducedState& base) {
  SecondOrderState s;
  s.base = base;
  const Index n = base.n_modes;
  s.m = Matrix::Zero(n * n, n * n);
  s.q = Matrix::Zero(n * n, n * n);
  s.zeta = Matrix::Zero(n * n, n);
  return s;
}

SecondOrderState SecondOrderState::operator+(const SecondOrderState& o) const {
  SecondOrderState out = *this;
  out.base += o.base;
  out.m += o.m;
  out.q += o.q;
  out.zeta += o.zeta;
  return out;
}

SecondOrderState SecondOrderState::operator*(double s) const {
  SecondOrderState out = *this;
  out.base = out.base * s;
  out.m *= s;
  out.q *= s;
  out.zeta *= s;
  return out;
}

bool SecondOrderState::has_nan() const {
  return base.has_nan() || !m.allFinite() || !q.allFinite() || !zeta.allFinite();
}

SecondOrderState rhs_second_order(const SecondOrderState& s, const GeneratorSpec& g) {
  const Index n = s.base.n_modes;
  if (g.n_modes() != n)
    throw std::invalid_argument("rhs_second_order: generator dimension mismatch");

  // base quintuple: squeezing-free part first
  GeneratorSpec g0 = g;
  g0.hs = Matrix();
  SecondOrderState d = SecondOrderState::extend(rhs(s.base, g0));

  const Matrix& rho = s.base.rho;
  const Vector& al = s.base.alpha;
  const Matrix& r = s.base.r;
  const Matrix& r4 = s.base.rho4;
  const Matrix& bt = s.base.beta;
  const Matrix& m = s.m;
  const Matrix& q = s.q;
  const Matrix& zt = s.zeta;
  const Matrix hs = g.hs.size() ? g.hs : Matrix::Zero(n, n);
  const Matrix hsc = hs.conjugate();
  const Matrix gu = g.gamma_up.size() ? g.gamma_up : Matrix::Zero(n, n);
  const Matrix gd = g.gamma_down.size() ? g.gamma_down : Matrix::Zero(n, n);
  const Matrix gg = gu - gd;
  const Matrix& h = g.h;
  const bool pump = g.has_pump();
  const bool squeeze = g.has_squeezing();

  // moment accessors exploiting the annihilation-slot symmetries
  auto me = [&](Index a, Index x, Index y, Index z) { return m(x * n + z, a * n + y); };
  auto qe = [&](Index w, Index x, Index y, Index z) { return q(x * n + z, w * n + y); };
  auto ze = [&](Index w, Index x, Index y) { return zt(x * n + y, w); };

  if (squeeze) {
    d.base.alpha += -2.0 * kI * (hsc * al.conjugate());
    d.base.rho += -2.0 * kI * (hsc * r.conjugate() - r * hs);
    Matrix half = -2.0 * kI * (hsc * rho.transpose()) - kI * hsc;
    d.base.r += half + half.transpose();

    // beta
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        for (Index c = 0; c < n; ++c) {
          Complex acc = 0;
          for (Index l = 0; l < n; ++l) {
            acc += 2.0 * kI * zt(a * n + b, l) * hs(l, c);
            acc += -2.0 * kI *
                   (std::conj(hs(a, l)) * std::conj(bt(l * n + c, b)) +
                    std::conj(hs(b, l)) * std::conj(bt(l * n + c, a)));
          }
          acc += -2.0 * kI * std::conj(hs(b, a)) * std::conj(al(c));
          d.base.beta(a * n + b, c) += acc;
        }

    // rho4
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index nn = 0; nn < n; ++nn)
          for (Index mm = 0; mm < n; ++mm) {
            Complex acc = 0;
            for (Index l = 0; l < n; ++l) {
              acc += 2.0 * kI * (hs(mm, l) * m(i * n + j, nn * n + l) +
                                 hs(nn, l) * m(i * n + j, mm * n + l));
              acc += -2.0 * kI * (std::conj(hs(j, l)) * std::conj(me(i, l, mm, nn)) +
                                  std::conj(hs(i, l)) * std::conj(me(j, l, mm, nn)));
            }
            acc += 2.0 * kI * hs(nn, mm) * r(i, j);
            if (i == mm) {
              Complex t1 = 0, t2 = 0;
              for (Index l = 0; l < n; ++l) {
                t1 += r(j, l) * hs(l, nn);
                t2 += std::conj(hs(j, l)) * std::conj(r(nn, l));
              }
              acc += 2.0 * kI * t1 - 2.0 * kI * t2;
            }
            acc += -2.0 * kI * std::conj(hs(j, i)) * std::conj(r(nn, mm));
            d.base.rho4(i * n + j, nn * n + mm) += acc;
          }
  }

  // ---- m
  for (Index b = 0; b < n; ++b)
    for (Index dd = 0; dd < n; ++dd)
      for (Index a = 0; a < n; ++a)
        for (Index c = 0; c < n; ++c) {
          Complex acc = 0;
          for (Index l = 0; l < n; ++l) {
            acc += -kI * (h(b, l) * me(a, l, c, dd) + h(c, l) * me(a, b, l, dd) +
                          h(dd, l) * me(a, b, c, l));
            acc += kI * h(l, a) * me(l, b, c, dd);
            acc += 0.5 * (gg(l, a) * me(l, b, c, dd) + gg(b, l) * me(a, l, c, dd) +
                          gg(c, l) * me(a, b, l, dd) + gg(dd, l) * me(a, b, c, l));
            if (squeeze) {
              acc += 2.0 * kI * qe(l, b, c, dd) * hs(l, a);
              acc += -2.0 * kI *
                     (std::conj(hs(b, l)) *
                          (r4(c * n + dd, a * n + l) - (c == l ? rho(dd, a) : Complex(0))) +
                      std::conj(hs(c, l)) * r4(b * n + dd, a * n + l) +
                      std::conj(hs(dd, l)) *
                          (r4(b * n + c, a * n + l) + (c == l ? rho(b, a) : Complex(0))));
            }
          }
          if (pump) {
            acc += g.xi(b) * bt(c * n + dd, a) + g.xi(c) * bt(b * n + dd, a) +
                   g.xi(dd) * bt(b * n + c, a) + std::conj(g.xi(a)) * zt(c * n + dd, b);
          }
          acc += gu(b, a) * r(c, dd) + gu(c, a) * r(b, dd) + gu(dd, a) * r(b, c);
          d.m(b * n + dd, a * n + c) += acc;
        }

  // ---- q
  for (Index b = 0; b < n; ++b)
    for (Index dd = 0; dd < n; ++dd)
      for (Index a = 0; a < n; ++a)
        for (Index c = 0; c < n; ++c) {
          Complex acc = 0;
          for (Index l = 0; l < n; ++l) {
            acc += -kI * (h(a, l) * qe(l, b, c, dd) + h(b, l) * qe(a, l, c, dd) +
                          h(c, l) * qe(a, b, l, dd) + h(dd, l) * qe(a, b, c, l));
            acc += 0.5 * (gg(a, l) * qe(l, b, c, dd) + gg(b, l) * qe(a, l, c, dd) +
                          gg(c, l) * qe(a, b, l, dd) + gg(dd, l) * qe(a, b, c, l));
            if (squeeze) {
              acc += -2.0 * kI *
                     (std::conj(hs(a, l)) * me(l, b, c, dd) +
                      std::conj(hs(b, l)) * me(l, a, c, dd) +
                      std::conj(hs(c, l)) * me(l, a, b, dd) +
                      std::conj(hs(dd, l)) * me(l, a, b, c));
            }
          }
          if (squeeze) {
            acc += -2.0 * kI *
                   (std::conj(hs(b, a)) * r(c, dd) + std::conj(hs(c, a)) * r(b, dd) +
                    std::conj(hs(c, b)) * r(a, dd) + std::conj(hs(dd, a)) * r(b, c) +
                    std::conj(hs(dd, b)) * r(a, c) + std::conj(hs(dd, c)) * r(a, b));
          }
          if (pump) {
            acc += g.xi(a) * ze(b, c, dd) + g.xi(b) * ze(a, c, dd) +
                   g.xi(c) * ze(a, b, dd) + g.xi(dd) * ze(a, b, c);
          }
          d.q(b * n + dd, a * n + c) += acc;
        }

  // ---- zeta
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      for (Index c = 0; c < n; ++c) {
        Complex acc = 0;
        for (Index l = 0; l < n; ++l) {
          acc += -kI * (h(a, l) * ze(l, b, c) + h(b, l) * ze(a, l, c) +
                        h(c, l) * ze(a, b, l));
          acc += 0.5 * (gg(a, l) * ze(l, b, c) + gg(b, l) * ze(a, l, c) +
                        gg(c, l) * ze(a, b, l));
          if (squeeze) {
            acc += -2.0 * kI *
                   (std::conj(hs(a, l)) * bt(b * n + c, l) +
                    std::conj(hs(b, l)) * bt(a * n + c, l) +
                    std::conj(hs(c, l)) * bt(a * n + b, l));
          }
        }
        if (squeeze) {
          acc += -2.0 * kI *
                 (std::conj(hs(b, a)) * al(c) + std::conj(hs(c, a)) * al(b) +
                  std::conj(hs(c, b)) * al(a));
        }
        if (pump) {
          acc += g.xi(a) * r(b, c) + g.xi(b) * r(a, c) + g.xi(c) * r(a, b);
        }
        d.zeta(a * n + b, c) += acc;
      }

  // scattering conjugations for the extra blocks
  for (const auto& ch : g.scattering) {
    if (ch.kappa == 0.0) continue;
    const Matrix u2 = kron(ch.u, ch.u);
    d.m += ch.kappa * (u2 * m * kron(ch.u.adjoint(), ch.u.transpose()) - m);
    d.q += ch.kappa * (u2 * q * kron(ch.u.transpose(), ch.u.transpose()) - q);
    d.zeta += ch.kappa * (u2 * zt * ch.u.transpose() - zt);
  }
  return d;
}

SecondOrderTrajectory integrate_second_order(const SecondOrderState& initial,
                                             const std::vector<Segment>& segments,
                                             const std::vector<double>& t_grid,
                                             const IntegrateOptions& opts) {
  if (t_grid.empty()) throw std::invalid_argument("integrate_second_order: empty grid");
  double total = 0.0;
  for (const auto& seg : segments) {
    seg.generator.validate();
    total += seg.duration;
  }
  if (t_grid.back() > total + 1e-12)
    throw std::invalid_argument("integrate_second_order: grid outside segments");

  SecondOrderTrajectory traj;
  SecondOrderState s = initial;
  double t = 0.0;
  std::size_t seg_i = 0;
  double seg_start = 0.0;
  for (double tg : t_grid) {
    while (t < tg - 1e-12) {
      while (seg_i + 1 < segments.size() &&
             t >= seg_start + segments[seg_i].duration - 1e-13) {
        seg_start += segments[seg_i].duration;
        ++seg_i;
      }
      double seg_end = seg_start + segments[seg_i].duration;
      double stop = std::min(tg, seg_end);
      if (stop <= t + 1e-13)
        throw std::invalid_argument("integrate_second_order: grid past last segment");
      const GeneratorSpec& g = segments[seg_i].generator;
      double dt = opts.dt > 0.0 ? opts.dt : g.default_step();
      s = detail::rk4_advance(std::move(s), t, stop, dt,
                              [&](const SecondOrderState& x) { return rhs_second_order(x, g); });
      if (s.has_nan())
        throw NumericalFailure("integrate_second_order: non-finite state");
      t = stop;
    }
    traj.times.push_back(tg);
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace rsf
