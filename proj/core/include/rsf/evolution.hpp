#pragma once

#include <functional>
#include <vector>

#include "rsf/generator.hpp"
#include "rsf/reduced_state.hpp"

namespace rsf {

/// Time derivative of the full reduced quintuple under a squeezing-free
/// generator. With xi = 0 the (rho, rho4) pair closes on itself.
ReducedState rhs(const ReducedState& s, const GeneratorSpec& g);

/// Closed derivative of the projected cross-party block. Requires every
/// generator matrix block-diagonal with respect to the bipartition (throws
/// NonlocalGenerator otherwise) and no coherent pump (the pump couples the
/// block to beta, which the closed form does not carry).
Matrix rhs_projected(const Matrix& p, const Matrix& rho, const GeneratorSpec& g,
                     const Bipartition& bp);

/// Piecewise-constant segment of the time-dependent generator.
struct Segment {
  GeneratorSpec generator;
  double duration = 0.0;
};

struct IntegrateOptions {
  double dt = 0.0;  // 0 = use GeneratorSpec::default_step per segment
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ReducedState> states;
  std::vector<Segment> segments;  // kept for local refinement (bisection)

  const ReducedState& at(std::size_t i) const { return states.at(i); }
  std::size_t size() const { return times.size(); }
};

/// Classical fixed-step fourth-order integration over piecewise-constant
/// segments, recording the state at every requested grid time. Grid times
/// must be non-decreasing, start at >= 0 and end within the total duration.
/// Throws NumericalFailure if the state turns non-finite.
Trajectory integrate(const ReducedState& initial, const std::vector<Segment>& segments,
                     const std::vector<double>& t_grid, const IntegrateOptions& opts = {});
Trajectory integrate(const ReducedState& initial, const GeneratorSpec& g,
                     const std::vector<double>& t_grid, const IntegrateOptions& opts = {});

/// Re-integrate from a stored state over [t_from, t_to] within the same
/// segment list; used to refine zero crossings.
ReducedState integrate_between(const ReducedState& from, const std::vector<Segment>& segments,
                               double t_from, double t_to, const IntegrateOptions& opts = {});

/// Evenly spaced grid with `samples` intervals over [0, t_max].
std::vector<double> uniform_grid(double t_max, int samples);

}  // namespace rsf
