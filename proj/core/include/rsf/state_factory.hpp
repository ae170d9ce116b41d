#pragma once

#include "rsf/presets.hpp"
#include "rsf/reduced_state.hpp"

namespace rsf {

/// Analytic reduced state of a preset; every block carries the closed-form
/// moments (no Fock-space truncation involved).
ReducedState build(const StatePreset& preset);

/// Two-mode squeezed vacuum with signed gain on modes (0,1); building block
/// for the four-mode squeezed preset and for covariance tests.
ReducedState tmsv_reduced(double gain);

/// Permutation unitary sending source mode `src[k]` to mode `k`.
Matrix mode_permutation(const std::vector<Index>& src);

}  // namespace rsf
