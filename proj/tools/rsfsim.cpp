// Command-line driver: scenario execution, built-in scenario library, and the
// brute-force cross-check of the reduced equations.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "rsf/errors.hpp"
#include "rsf/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int default_jobs() {
  if (const char* env = std::getenv("RSFSIM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

std::string out_path_for(const std::string& config_path, const std::string& out_opt,
                         bool many) {
  if (!out_opt.empty() && !many) return out_opt;
  std::filesystem::path p(config_path);
  p.replace_extension(".csv");
  if (!out_opt.empty()) {
    std::filesystem::path dir(out_opt);
    return (dir / p.filename()).string();
  }
  return p.string();
}

int run_one(const std::string& config, const std::string& out, double dt, bool many) {
  rsf::Scenario s = rsf::parse_scenario_file(config);
  if (dt > 0) s.dt = dt;
  rsf::ResultTable table = rsf::run_scenario(s);
  std::string path = out_path_for(config, out, many);
  rsf::emit_csv(table, path);
  std::cout << config << " -> " << path << " (" << table.rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reduced-state simulator for open multimode bosonic dynamics"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute scenario config files");
  std::vector<std::string> configs;
  std::string out;
  double dt = 0.0;
  int jobs = default_jobs();
  run->add_option("config", configs, "scenario config file(s)")->required();
  run->add_option("--out", out, "output CSV path (directory when several configs)");
  run->add_option("--dt", dt, "integrator step override");
  run->add_option("--jobs", jobs, "parallel scenario workers");

  // scenario
  auto* sc = app.add_subcommand("scenario", "run a built-in scenario by name");
  std::string name;
  std::vector<std::string> params;
  std::string sc_out = "scenario.csv";
  bool emit_config = false;
  sc->add_option("name", name,
                 "one of: bsv_thermal, single_photon_thermal, bsv_stationary, "
                 "thermal_limit, split_gen_q, beamsplit_statistics")
      ->required();
  sc->add_option("--param", params, "override, e.g. --param gain=0.5")->take_all();
  sc->add_option("--out", sc_out, "output CSV path");
  sc->add_flag("--emit-config", emit_config, "print the equivalent config text and exit");

  // oracle-check
  auto* oc = app.add_subcommand("oracle-check",
                                "compare the reduced evolution against the truncated "
                                "Fock-space integrator");
  std::string oc_config;
  int cutoff = 4;
  double tol = 1e-6;
  oc->add_option("config", oc_config, "scenario config file")->required();
  oc->add_option("--cutoff", cutoff, "per-mode Fock cutoff")->required();
  oc->add_option("--tol", tol, "acceptance tolerance");
  oc->add_option("--dt", dt, "integrator step override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (configs.size() == 1 || jobs <= 1) {
        for (const auto& c : configs) run_one(c, out, dt, configs.size() > 1);
      } else {
        std::mutex failures_mutex;
        std::vector<std::string> failures;
        std::size_t next = 0;
        std::mutex next_mutex;
        auto worker = [&]() {
          for (;;) {
            std::size_t i;
            {
              std::lock_guard lock(next_mutex);
              if (next >= configs.size()) return;
              i = next++;
            }
            try {
              run_one(configs[i], out, dt, true);
            } catch (const std::exception& e) {
              std::lock_guard lock(failures_mutex);
              failures.push_back(configs[i] + ": " + e.what());
            }
          }
        };
        std::vector<std::thread> pool;
        for (int k = 0; k < std::min<int>(jobs, static_cast<int>(configs.size())); ++k)
          pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (!failures.empty()) {
          for (const auto& f : failures) std::cerr << "error: " << f << "\n";
          return kExitNumerical;
        }
      }
    } else if (*sc) {
      std::map<std::string, double> kv;
      for (const auto& p : params) {
        auto eq = p.find('=');
        if (eq == std::string::npos)
          throw rsf::ConfigError("--param expects key=value, got '" + p + "'");
        kv[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
      }
      rsf::Scenario s = rsf::bundled_scenario(name, kv);
      if (dt > 0) s.dt = dt;
      if (emit_config) {
        std::cout << rsf::serialize_scenario(s);
        return 0;
      }
      rsf::ResultTable table = rsf::run_scenario(s);
      rsf::emit_csv(table, sc_out);
      std::cout << name << " -> " << sc_out << " (" << table.rows.size() << " rows)\n";
    } else if (*oc) {
      rsf::Scenario s = rsf::parse_scenario_file(oc_config);
      if (dt > 0) s.dt = dt;
      rsf::OracleReport rep = rsf::oracle_check(s, cutoff, tol);
      std::cout << rep.summary();
      if (!rep.pass) return kExitNumerical;
    }
  } catch (const rsf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rsf::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
