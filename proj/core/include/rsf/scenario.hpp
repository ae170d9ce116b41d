#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rsf/evolution.hpp"
#include "rsf/presets.hpp"

namespace rsf {

/// Configuration parse failure; carries a 1-based line number.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct BeamsplitterStep {
  Index i = 0, j = 1;
  double transmissivity = 0.5;
};
struct PhaseStep {
  Index mode = 0;
  double dphi = 0.0;
};
struct EfficiencyStep {
  RealVector etas;
};
struct EvolveStep {
  GeneratorSpec generator;
  double duration = 0.0;
};
using PipelineStep = std::variant<EvolveStep, BeamsplitterStep, PhaseStep, EfficiencyStep>;

struct ObservableSet {
  bool ppt = false;
  bool critical_time = false;
  bool covariance_ppt = false;
  bool entropy = false;
  bool occupations = false;
  std::vector<Index> mandel;                    // mandel_q(i)
  std::vector<std::pair<Index, Index>> gen_q;   // gen_q(i,j)
};

struct Scenario {
  Index n_modes = 0;
  StatePreset initial;
  std::optional<Bipartition> bipartition;
  ObservableSet observables;
  int samples = 100;
  double dt = 0.0;  // 0 = automatic
  std::vector<PipelineStep> pipeline;

  bool uses_squeezing() const;
  double total_duration() const;
};

/// Strict key-value parser for the scenario format documented in the README.
/// Unknown keys and malformed values raise ConfigError with a line number.
Scenario parse_scenario(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

/// Canonical config text; parse(serialize(s)) reproduces s.
std::string serialize_scenario(const Scenario& s);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Execute the pipeline and sample the requested observables on an even
/// grid over the total evolution time (a single row when the pipeline has
/// no evolution segments).
ResultTable run_scenario(const Scenario& s);

/// Full-precision CSV (17 significant digits, LF endings).
void emit_csv(const ResultTable& table, std::ostream& out);
void emit_csv(const ResultTable& table, const std::string& path);

struct BlockDeviation {
  std::string block;
  double max_abs = 0.0;
  Index row = 0, col = 0;
  double at_time = 0.0;
};

struct OracleReport {
  std::vector<BlockDeviation> blocks;  // rho, alpha, r, rho4, beta
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string summary() const;
};

/// Run the scenario through both the reduced equations and the truncated
/// Fock-space integrator and compare every block at every grid point.
/// Efficiency steps are rejected (no unitary lift).
OracleReport oracle_check(const Scenario& s, Index cutoff, double tol);

/// Named built-in scenarios with parameter overrides (keys documented per
/// scenario in the README). Unknown name or key throws ConfigError.
Scenario bundled_scenario(const std::string& name,
                          const std::map<std::string, double>& params = {});
std::vector<std::string> bundled_scenario_names();

}  // namespace rsf
