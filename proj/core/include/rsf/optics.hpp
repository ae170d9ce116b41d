#pragma once

#include "rsf/generator.hpp"
#include "rsf/reduced_state.hpp"

namespace rsf {

/// Two-port beamsplitter on modes (i, j): identity except the block
/// [[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]], R = 1 - T.
Matrix beamsplitter_unitary(double transmissivity, Index i, Index j, Index n_modes);

/// Instantaneous phase shift: diagonal unitary with exp(i dphi) at mode i.
ReducedState phase_shifter(const ReducedState& rs, Index i, double dphi);

/// Phase shifter as an evolution segment: adds rate * n_i to the Hamiltonian.
/// Over a duration tau this accumulates exp(-i rate tau) on mode i, i.e. it
/// equals the instantaneous variant with dphi = -rate * tau.
GeneratorSpec phase_segment(const GeneratorSpec& g, Index i, double rate);

/// Detector inefficiency: every block scaled by sqrt(eta) per operator index
/// (diagonal non-unitary mode map). Mirrors the trace-out-the-reflected-port
/// model exactly on all cross-index moments and on every projected block;
/// fourth-moment elements with coincident first/second-space indices keep
/// the reordering term scaled rather than re-derived.
ReducedState detector_efficiency(const ReducedState& rs, const RealVector& etas);

/// u h u^+ = diag(ascending). Returns (u, diagonal entries).
std::pair<Matrix, RealVector> diagonalize_hamiltonian(const Matrix& h);

}  // namespace rsf
