#pragma once

#include <array>
#include <vector>

#include "rsf/linalg.hpp"

namespace rsf {

/// Named initial states shared by the analytic factory, the Fock-space
/// oracle and the scenario configs.
struct StatePreset {
  enum class Kind {
    Vacuum,
    Fock,
    Coherent,
    Thermal,
    Bsv,
    SinglePhotonSplit,
    SinglePhotonWeakHomodyne,
  };

  Kind kind = Kind::Vacuum;
  Index n_modes = 0;

  std::vector<Index> occupations;  // Fock
  Vector amplitudes;               // Coherent
  std::vector<double> nbar;        // Thermal
  double gain = 0.0;               // Bsv amplification gain
  // Bsv / weak homodyne mode quadruple (m1,m2,m3,m4): squeezed pairs are
  // (m1,m4) and (m2,m3); the weak-homodyne photon is split across (m1,m3)
  // with coherent amplitude alpha in (m2,m4).
  std::array<Index, 4> quad{0, 1, 2, 3};
  std::array<Index, 2> pair{0, 1};  // SinglePhotonSplit modes
  double alpha = 0.0;               // weak-homodyne local oscillator amplitude

  static StatePreset vacuum(Index n);
  static StatePreset fock(std::vector<Index> occ);
  static StatePreset coherent(Vector amps);
  static StatePreset thermal(std::vector<double> nbar);
  static StatePreset bsv(double gain, std::array<Index, 4> quad = {0, 1, 2, 3},
                         Index n_modes = 4);
  static StatePreset single_photon_split(std::array<Index, 2> pair = {0, 1},
                                         Index n_modes = 2);
  static StatePreset single_photon_weak_homodyne(double alpha,
                                                 std::array<Index, 4> quad = {0, 1, 2, 3},
                                                 Index n_modes = 4);

  void validate() const;  // throws std::invalid_argument
};

}  // namespace rsf
