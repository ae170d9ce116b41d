#include "rsf/entanglement.hpp"

#include <cmath>
#include <stdexcept>

#include "rsf/errors.hpp"

namespace rsf {

PptReport ppt_report(const TwoQuditState& s) {
  if (s.dim_a < 2 || s.dim_b < 2)
    throw std::invalid_argument("ppt_report: both parties must be at least two-dimensional");
  Matrix pt = partial_transpose_second(s);
  if (hermiticity_defect(pt) > 1e-8)
    throw NumericalFailure("ppt_report: projected state lost Hermiticity; "
                           "defect " + std::to_string(hermiticity_defect(pt)));
  Eigen::SelfAdjointEigenSolver<Matrix> es((pt + pt.adjoint()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  PptReport rep;
  rep.eigenvalues = es.eigenvalues();
  rep.min_eigenvalue = rep.eigenvalues.minCoeff();
  rep.entangled = rep.min_eigenvalue < -kTolDetect;
  rep.trace_norm = s.trace_norm;
  return rep;
}

PptReport ppt_report(const ReducedState& rs, const Bipartition& bp) {
  return ppt_report(normalize_projected(rs, bp));
}

namespace {

double min_ppt_eigenvalue(const ReducedState& s, const Bipartition& bp) {
  return ppt_report(s, bp).min_eigenvalue;
}

}  // namespace

std::optional<double> critical_time(const Trajectory& traj, const Bipartition& bp) {
  if (traj.size() < 2) return std::nullopt;
  std::vector<double> lam(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    lam[i] = min_ppt_eigenvalue(traj.states[i], bp);

  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    if (lam[i] < 0.0 && lam[i + 1] >= 0.0) {
      // bisection on [t_i, t_{i+1}], re-integrating from the stored state
      double lo = traj.times[i], hi = traj.times[i + 1];
      const ReducedState& anchor = traj.states[i];
      while (hi - lo > 1e-8) {
        double mid = 0.5 * (lo + hi);
        ReducedState s = integrate_between(anchor, traj.segments, traj.times[i], mid);
        if (min_ppt_eigenvalue(s, bp) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return std::nullopt;
}

CovarianceMatrix covariance_from_reduced(const ReducedState& rs) {
  const Index n = rs.n_modes;
  RealMatrix v(2 * n, 2 * n);
  auto re = [](Complex z) { return z.real(); };
  auto im = [](Complex z) { return z.imag(); };
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) {
      double xjxk = re(rs.r(j, k)) + re(rs.rho(j, k)) + (j == k ? 0.5 : 0.0) -
                    2.0 * re(rs.alpha(j)) * re(rs.alpha(k));
      double pjpk = -re(rs.r(j, k)) + re(rs.rho(j, k)) + (j == k ? 0.5 : 0.0) -
                    2.0 * im(rs.alpha(j)) * im(rs.alpha(k));
      double xjpk = im(rs.r(j, k)) - im(rs.rho(j, k)) -
                    2.0 * re(rs.alpha(j)) * im(rs.alpha(k));
      double pjxk = im(rs.r(j, k)) + im(rs.rho(j, k)) -
                    2.0 * im(rs.alpha(j)) * re(rs.alpha(k));
      v(2 * j, 2 * k) = xjxk;
      v(2 * j + 1, 2 * k + 1) = pjpk;
      v(2 * j, 2 * k + 1) = xjpk;
      v(2 * j + 1, 2 * k) = pjxk;
    }
  return {RealMatrix((v + v.transpose()) / 2.0)};
}

RealVector covariance_ppt(const CovarianceMatrix& cv, const Bipartition& bp) {
  const Index n2 = cv.v.rows();
  const Index n = n2 / 2;
  if (bp.max_mode() >= n)
    throw std::invalid_argument("covariance_ppt: bipartition exceeds mode count");
  if (static_cast<Index>(bp.set_a().size() + bp.set_b().size()) != n)
    throw std::invalid_argument("covariance_ppt: bipartition must cover all modes");
  RealVector qdiag = RealVector::Ones(n2);
  for (Index k : bp.set_b()) qdiag(2 * k + 1) = -1.0;  // flip momenta of party B
  RealMatrix qvq = qdiag.asDiagonal() * cv.v * qdiag.asDiagonal();
  Matrix crit = qvq.cast<Complex>();
  for (Index k = 0; k < n; ++k) {
    crit(2 * k, 2 * k + 1) -= kI * 0.5;
    crit(2 * k + 1, 2 * k) += kI * 0.5;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((crit + crit.adjoint()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double mandel_q(const ReducedState& rs, Index i) { return gen_q(rs, i, i); }

double gen_q(const ReducedState& rs, Index i, Index j) {
  const Index n = rs.n_modes;
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("gen_q: mode index out of range");
  double ni = rs.rho(i, i).real();
  if (ni <= kTol)
    throw EmptyMode("gen_q: mode occupation vanishes; statistic undefined");
  // exchange correlator <a_i^+ a_j a_j^+ a_i> sits at rows (j,i), cols (i,j)
  Complex corr = rs.rho4(j * n + i, i * n + j) - rs.rho(j, i) * rs.rho(i, j);
  return corr.real() / ni - 1.0;
}

double rsf_entropy(const ReducedState& rs) {
  Matrix ra = rs.rho - rs.alpha * rs.alpha.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es((ra + ra.adjoint()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) {
    double x = es.eigenvalues()(k);
    if (x < -kTol)
      throw std::invalid_argument("rsf_entropy: negative occupation eigenvalue " +
                                  std::to_string(x));
    if (x <= 0.0) continue;
    s += (x + 1.0) * std::log1p(x) - x * std::log(x);
  }
  return s;
}

}  // namespace rsf
