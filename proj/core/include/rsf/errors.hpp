#pragma once

#include <stdexcept>
#include <string>

namespace rsf {

/// Projected two-qudit block has (numerically) zero trace, so it cannot be
/// normalized. Happens for states whose cross-party number correlations all
/// vanish (vacuum, or superpositions occupying only one party).
class TracelessState : public std::runtime_error {
 public:
  explicit TracelessState(const std::string& what) : std::runtime_error(what) {}
};

/// A generator handed to the closed (projected) evolution couples the two
/// parties of the bipartition.
class NonlocalGenerator : public std::runtime_error {
 public:
  explicit NonlocalGenerator(const std::string& what) : std::runtime_error(what) {}
};

/// Mode occupation is zero where a normalized statistic requires dividing by it.
class EmptyMode : public std::runtime_error {
 public:
  explicit EmptyMode(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during integration (NaN, cutoff leakage, step violation).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsf
