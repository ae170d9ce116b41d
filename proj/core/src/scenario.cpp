#include "rsf/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "rsf/entanglement.hpp"
#include "rsf/errors.hpp"
#include "rsf/fock.hpp"
#include "rsf/optics.hpp"
#include "rsf/second_order.hpp"
#include "rsf/state_factory.hpp"

namespace rsf {

bool Scenario::uses_squeezing() const {
  for (const auto& step : pipeline)
    if (const auto* ev = std::get_if<EvolveStep>(&step))
      if (ev->generator.has_squeezing()) return true;
  return false;
}

double Scenario::total_duration() const {
  double t = 0.0;
  for (const auto& step : pipeline)
    if (const auto* ev = std::get_if<EvolveStep>(&step)) t += ev->duration;
  return t;
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(line, "expected a number, got '" + s + "'");
  }
}

int parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(line, "expected an integer, got '" + s + "'");
  }
}

// complex literal: "1.5", "1.5+0.5i", "-2i", "1.5-0.5i"
Complex parse_complex(const std::string& raw, int line) {
  std::string s = raw;
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw ConfigError(line, "empty complex literal");
  if (s.back() != 'i') return {parse_double(s, line), 0.0};
  s.pop_back();
  if (s.empty() || s == "+" || s == "-")
    return {0.0, s == "-" ? -1.0 : 1.0};
  // split at the last +/- that is not an exponent sign and not leading
  std::size_t cut = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      cut = k;
      break;
    }
  }
  if (cut == std::string::npos) return {0.0, parse_double(s, line)};
  double re = parse_double(s.substr(0, cut), line);
  std::string im_str = s.substr(cut);
  if (im_str == "+") im_str = "1";
  if (im_str == "-") im_str = "-1";
  return {re, parse_double(im_str, line)};
}

// 1-based mode list "1,3" -> 0-based indices
std::vector<Index> parse_modes(const std::string& s, int line, Index n_modes) {
  std::vector<Index> out;
  for (const auto& tok : split(s, ',')) {
    int v = parse_int(tok, line);
    if (v < 1 || v > n_modes)
      throw ConfigError(line, "mode index " + tok + " outside 1.." +
                                  std::to_string(n_modes));
    out.push_back(v - 1);
  }
  if (out.empty()) throw ConfigError(line, "empty mode list");
  return out;
}

StatePreset parse_initial(const std::string& value, int line, Index n_modes) {
  std::string s = trim(value);
  auto open = s.find('(');
  std::string name = open == std::string::npos ? s : trim(s.substr(0, open));
  std::string args;
  if (open != std::string::npos) {
    if (s.back() != ')') throw ConfigError(line, "missing ')' in initial state");
    args = s.substr(open + 1, s.size() - open - 2);
  }
  auto named = [&](const std::string& key) -> std::optional<std::string> {
    for (const auto& part : split(args, ';')) {
      auto eq = part.find('=');
      if (eq == std::string::npos)
        throw ConfigError(line, "expected key=value arguments in '" + name + "'");
      if (trim(part.substr(0, eq)) == key) return trim(part.substr(eq + 1));
    }
    return std::nullopt;
  };
  auto quad_of = [&](StatePreset& p) {
    if (auto q = named("quad")) {
      auto modes = parse_modes(*q, line, n_modes);
      if (modes.size() != 4) throw ConfigError(line, "quad needs four modes");
      std::copy(modes.begin(), modes.end(), p.quad.begin());
    }
  };

  if (name == "vacuum") return StatePreset::vacuum(n_modes);
  if (name == "fock") {
    std::vector<Index> occ;
    for (const auto& tok : split(args, ',')) occ.push_back(parse_int(tok, line));
    if (static_cast<Index>(occ.size()) != n_modes)
      throw ConfigError(line, "fock() needs one occupation per mode");
    return StatePreset::fock(std::move(occ));
  }
  if (name == "coherent") {
    auto toks = split(args, ',');
    if (static_cast<Index>(toks.size()) != n_modes)
      throw ConfigError(line, "coherent() needs one amplitude per mode");
    Vector a(n_modes);
    for (Index k = 0; k < n_modes; ++k) a(k) = parse_complex(toks[k], line);
    return StatePreset::coherent(std::move(a));
  }
  if (name == "thermal") {
    std::vector<double> nb;
    for (const auto& tok : split(args, ',')) nb.push_back(parse_double(tok, line));
    if (static_cast<Index>(nb.size()) != n_modes)
      throw ConfigError(line, "thermal() needs one occupation per mode");
    return StatePreset::thermal(std::move(nb));
  }
  if (name == "bsv") {
    auto g = named("gain");
    if (!g) throw ConfigError(line, "bsv() requires gain=");
    StatePreset p = StatePreset::bsv(parse_double(*g, line), {0, 1, 2, 3}, n_modes);
    quad_of(p);
    return p;
  }
  if (name == "single_photon_split") {
    StatePreset p = StatePreset::single_photon_split({0, 1}, n_modes);
    if (auto m = named("modes")) {
      auto modes = parse_modes(*m, line, n_modes);
      if (modes.size() != 2) throw ConfigError(line, "modes= needs two entries");
      p.pair = {modes[0], modes[1]};
    }
    return p;
  }
  if (name == "single_photon_weak_homodyne") {
    auto a = named("alpha");
    if (!a) throw ConfigError(line, "single_photon_weak_homodyne() requires alpha=");
    StatePreset p = StatePreset::single_photon_weak_homodyne(parse_double(*a, line),
                                                             {0, 1, 2, 3}, n_modes);
    quad_of(p);
    return p;
  }
  throw ConfigError(line, "unknown initial state '" + name + "'");
}

void parse_observables(const std::string& value, int line, Index n_modes,
                       ObservableSet& obs) {
  // split on commas at depth 0 (arguments contain commas)
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) items.push_back(trim(cur));
  for (const auto& item : items) {
    if (item == "ppt")
      obs.ppt = true;
    else if (item == "critical_time")
      obs.critical_time = true;
    else if (item == "covariance_ppt")
      obs.covariance_ppt = true;
    else if (item == "entropy")
      obs.entropy = true;
    else if (item == "occupations")
      obs.occupations = true;
    else if (item.rfind("mandel_q(", 0) == 0 && item.back() == ')') {
      auto modes = parse_modes(item.substr(9, item.size() - 10), line, n_modes);
      if (modes.size() != 1) throw ConfigError(line, "mandel_q takes one mode");
      obs.mandel.push_back(modes[0]);
    } else if (item.rfind("gen_q(", 0) == 0 && item.back() == ')') {
      auto modes = parse_modes(item.substr(6, item.size() - 7), line, n_modes);
      if (modes.size() != 2) throw ConfigError(line, "gen_q takes two modes");
      obs.gen_q.emplace_back(modes[0], modes[1]);
    } else {
      throw ConfigError(line, "unknown observable '" + item + "'");
    }
  }
}

struct SectionBuf {
  std::string name;
  int line = 0;
  std::vector<std::tuple<int, std::string, std::string>> entries;  // line, key, value
};

class SectionParser {
 public:
  SectionParser(const SectionBuf& buf, Index n_modes) : buf_(buf), n_modes_(n_modes) {}

  std::optional<std::string> take(const std::string& key) {
    for (auto& [ln, k, v] : buf_.entries) {
      if (k == key && !consumed(&v)) {
        consumed_.push_back(&v);
        last_line_ = ln;
        return v;
      }
    }
    return std::nullopt;
  }
  std::vector<std::pair<int, std::string>> take_all(const std::string& key) {
    std::vector<std::pair<int, std::string>> out;
    for (auto& [ln, k, v] : buf_.entries)
      if (k == key && !consumed(&v)) {
        consumed_.push_back(&v);
        out.emplace_back(ln, v);
      }
    return out;
  }
  void finish() const {
    for (const auto& [ln, k, v] : buf_.entries)
      if (!consumed(&v))
        throw ConfigError(ln, "unknown key '" + k + "' in section [" + buf_.name + "]");
  }
  int line() const { return last_line_ ? last_line_ : buf_.line; }
  Index n_modes() const { return n_modes_; }

 private:
  bool consumed(const std::string* v) const {
    return std::find(consumed_.begin(), consumed_.end(), v) != consumed_.end();
  }
  const SectionBuf& buf_;
  Index n_modes_;
  std::vector<const std::string*> consumed_;
  int last_line_ = 0;
};

EvolveStep parse_evolve(SectionParser& p) {
  EvolveStep step;
  const Index n = p.n_modes();
  step.generator = GeneratorSpec::zero(n);
  auto dur = p.take("duration");
  if (!dur) throw ConfigError(p.line(), "[evolve] requires duration");
  step.duration = parse_double(*dur, p.line());
  if (step.duration < 0) throw ConfigError(p.line(), "duration must be >= 0");

  std::optional<ThermalBathSpec> bath;
  if (auto v = p.take("bath.n")) {
    bath.emplace();
    bath->n_omega = parse_double(*v, p.line());
  }
  if (auto v = p.take("bath.rate")) {
    if (!bath) throw ConfigError(p.line(), "bath.rate without bath.n");
    bath->gamma_omega = parse_double(*v, p.line());
  }
  if (auto v = p.take("bath.modes")) {
    if (!bath) throw ConfigError(p.line(), "bath.modes without bath.n");
    bath->coupled_modes = parse_modes(*v, p.line(), n);
  }
  if (bath) {
    if (bath->coupled_modes.empty())
      for (Index k = 0; k < n; ++k) bath->coupled_modes.push_back(k);
    std::tie(step.generator.gamma_up, step.generator.gamma_down) =
        bath_to_gamma(*bath, n);
  }
  if (auto v = p.take("h.diag")) {
    auto toks = split(*v, ',');
    if (static_cast<Index>(toks.size()) != n)
      throw ConfigError(p.line(), "h.diag needs one entry per mode");
    for (Index k = 0; k < n; ++k)
      step.generator.h(k, k) += parse_double(toks[k], p.line());
  }
  for (auto& [ln, v] : p.take_all("h.hop")) {
    auto toks = split(v, ',');
    if (toks.size() != 3) throw ConfigError(ln, "h.hop = i,j,g");
    auto modes = parse_modes(toks[0] + "," + toks[1], ln, n);
    double g = parse_double(toks[2], ln);
    step.generator.h(modes[0], modes[1]) += g;
    step.generator.h(modes[1], modes[0]) += g;
  }
  if (auto v = p.take("xi")) {
    auto toks = split(*v, ',');
    if (static_cast<Index>(toks.size()) != n)
      throw ConfigError(p.line(), "xi needs one entry per mode");
    for (Index k = 0; k < n; ++k) step.generator.xi(k) = parse_complex(toks[k], p.line());
  }
  auto squeezes = p.take_all("squeeze");
  if (!squeezes.empty()) {
    step.generator.hs = Matrix::Zero(n, n);
    for (auto& [ln, v] : squeezes) {
      auto toks = split(v, ',');
      if (toks.size() != 3) throw ConfigError(ln, "squeeze = i,j,g");
      auto modes = parse_modes(toks[0] + "," + toks[1], ln, n);
      double g = parse_double(toks[2], ln);
      step.generator.hs(modes[0], modes[1]) += g;
      if (modes[0] != modes[1]) step.generator.hs(modes[1], modes[0]) += g;
    }
  }
  auto kappa = p.take("scatter.kappa");
  auto sbs = p.take("scatter.bs");
  if (kappa.has_value() != sbs.has_value())
    throw ConfigError(p.line(), "scatter.kappa and scatter.bs go together");
  if (kappa) {
    auto toks = split(*sbs, ',');
    if (toks.size() != 3) throw ConfigError(p.line(), "scatter.bs = i,j,T");
    auto modes = parse_modes(toks[0] + "," + toks[1], p.line(), n);
    ScatteringChannel ch;
    ch.u = beamsplitter_unitary(parse_double(toks[2], p.line()), modes[0], modes[1], n);
    ch.kappa = parse_double(*kappa, p.line());
    step.generator.scattering.push_back(std::move(ch));
  }
  p.finish();
  return step;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::vector<SectionBuf> sections;
  sections.push_back({"", 0, {}});
  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(ln, "malformed section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), ln, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(ln, "expected key = value");
    sections.back().entries.emplace_back(ln, trim(line.substr(0, eq)),
                                         trim(line.substr(eq + 1)));
  }

  Scenario s;
  {
    SectionParser head(sections[0], 0);
    auto modes = head.take("modes");
    if (!modes) throw ConfigError("missing required key 'modes'");
    s.n_modes = parse_int(*modes, head.line());
    if (s.n_modes < 1) throw ConfigError(head.line(), "modes must be >= 1");
    SectionParser header(sections[0], s.n_modes);
    header.take("modes");
    auto initial = header.take("initial");
    if (!initial) throw ConfigError("missing required key 'initial'");
    s.initial = parse_initial(*initial, header.line(), s.n_modes);
    if (auto v = header.take("bipartition")) {
      auto halves = split(*v, '|');
      if (halves.size() != 2) throw ConfigError(header.line(), "bipartition = A | B");
      try {
        s.bipartition.emplace(parse_modes(halves[0], header.line(), s.n_modes),
                              parse_modes(halves[1], header.line(), s.n_modes));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(header.line(), e.what());
      }
    }
    if (auto v = header.take("observables"))
      parse_observables(*v, header.line(), s.n_modes, s.observables);
    if (auto v = header.take("samples")) {
      s.samples = parse_int(*v, header.line());
      if (s.samples < 1) throw ConfigError(header.line(), "samples must be >= 1");
    }
    if (auto v = header.take("dt")) {
      s.dt = parse_double(*v, header.line());
      if (s.dt <= 0) throw ConfigError(header.line(), "dt must be > 0");
    }
    header.finish();
  }

  for (std::size_t i = 1; i < sections.size(); ++i) {
    SectionParser p(sections[i], s.n_modes);
    const std::string& name = sections[i].name;
    if (name == "evolve") {
      s.pipeline.emplace_back(parse_evolve(p));
    } else if (name == "beamsplitter") {
      BeamsplitterStep b;
      auto m = p.take("modes");
      if (!m) throw ConfigError(sections[i].line, "[beamsplitter] requires modes");
      auto modes = parse_modes(*m, p.line(), s.n_modes);
      if (modes.size() != 2) throw ConfigError(p.line(), "modes = i,j");
      b.i = modes[0];
      b.j = modes[1];
      auto t = p.take("t");
      if (!t) throw ConfigError(sections[i].line, "[beamsplitter] requires t");
      b.transmissivity = parse_double(*t, p.line());
      p.finish();
      s.pipeline.emplace_back(b);
    } else if (name == "phase") {
      PhaseStep ph;
      auto m = p.take("mode");
      if (!m) throw ConfigError(sections[i].line, "[phase] requires mode");
      ph.mode = parse_modes(*m, p.line(), s.n_modes).at(0);
      auto d = p.take("dphi");
      if (!d) throw ConfigError(sections[i].line, "[phase] requires dphi");
      ph.dphi = parse_double(*d, p.line());
      p.finish();
      s.pipeline.emplace_back(ph);
    } else if (name == "efficiency") {
      EfficiencyStep e;
      auto v = p.take("eta");
      if (!v) throw ConfigError(sections[i].line, "[efficiency] requires eta");
      auto toks = split(*v, ',');
      if (static_cast<Index>(toks.size()) != s.n_modes)
        throw ConfigError(p.line(), "eta needs one entry per mode");
      e.etas.resize(s.n_modes);
      for (Index k = 0; k < s.n_modes; ++k) e.etas(k) = parse_double(toks[k], p.line());
      p.finish();
      s.pipeline.emplace_back(e);
    } else {
      throw ConfigError(sections[i].line, "unknown section [" + name + "]");
    }
  }

  // semantic checks
  try {
    s.initial.validate();
    for (const auto& step : s.pipeline)
      if (const auto* ev = std::get_if<EvolveStep>(&step)) ev->generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if ((s.observables.ppt || s.observables.critical_time || s.observables.covariance_ppt) &&
      !s.bipartition)
    throw ConfigError("ppt-family observables require a bipartition");
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_complex(Complex z) {
  if (z.imag() == 0.0) return fmt_num(z.real());
  std::string s = fmt_num(z.real());
  s += (z.imag() >= 0 ? "+" : "");
  s += fmt_num(z.imag()) + "i";
  return s;
}

std::string join_modes(const std::vector<Index>& modes) {
  std::string out;
  for (std::size_t k = 0; k < modes.size(); ++k)
    out += (k ? "," : "") + std::to_string(modes[k] + 1);
  return out;
}

std::string serialize_initial(const StatePreset& p) {
  using K = StatePreset::Kind;
  switch (p.kind) {
    case K::Vacuum:
      return "vacuum";
    case K::Fock: {
      std::string s = "fock(";
      for (std::size_t k = 0; k < p.occupations.size(); ++k)
        s += (k ? "," : "") + std::to_string(p.occupations[k]);
      return s + ")";
    }
    case K::Coherent: {
      std::string s = "coherent(";
      for (Index k = 0; k < p.amplitudes.size(); ++k)
        s += (k ? "," : "") + fmt_complex(p.amplitudes(k));
      return s + ")";
    }
    case K::Thermal: {
      std::string s = "thermal(";
      for (std::size_t k = 0; k < p.nbar.size(); ++k)
        s += (k ? "," : "") + fmt_num(p.nbar[k]);
      return s + ")";
    }
    case K::Bsv:
      return "bsv(gain=" + fmt_num(p.gain) + "; quad=" +
             join_modes({p.quad.begin(), p.quad.end()}) + ")";
    case K::SinglePhotonSplit:
      return "single_photon_split(modes=" + join_modes({p.pair.begin(), p.pair.end()}) +
             ")";
    case K::SinglePhotonWeakHomodyne:
      return "single_photon_weak_homodyne(alpha=" + fmt_num(p.alpha) + "; quad=" +
             join_modes({p.quad.begin(), p.quad.end()}) + ")";
  }
  return "";
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "modes = " << s.n_modes << "\n";
  out << "initial = " << serialize_initial(s.initial) << "\n";
  if (s.bipartition)
    out << "bipartition = " << join_modes(s.bipartition->set_a()) << " | "
        << join_modes(s.bipartition->set_b()) << "\n";
  {
    std::vector<std::string> items;
    const auto& o = s.observables;
    if (o.ppt) items.push_back("ppt");
    if (o.critical_time) items.push_back("critical_time");
    if (o.covariance_ppt) items.push_back("covariance_ppt");
    if (o.entropy) items.push_back("entropy");
    if (o.occupations) items.push_back("occupations");
    for (Index m : o.mandel) items.push_back("mandel_q(" + std::to_string(m + 1) + ")");
    for (auto [i, j] : o.gen_q)
      items.push_back("gen_q(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    if (!items.empty()) {
      out << "observables = ";
      for (std::size_t k = 0; k < items.size(); ++k) out << (k ? ", " : "") << items[k];
      out << "\n";
    }
  }
  out << "samples = " << s.samples << "\n";
  if (s.dt > 0) out << "dt = " << fmt_num(s.dt) << "\n";

  for (const auto& step : s.pipeline) {
    if (const auto* ev = std::get_if<EvolveStep>(&step)) {
      out << "\n[evolve]\nduration = " << fmt_num(ev->duration) << "\n";
      const auto& g = ev->generator;
      const Index n = g.n_modes();
      for (Index k = 0; k < n; ++k)
        if (std::abs(g.h(k, k)) > 0) {
          out << "h.diag = ";
          for (Index kk = 0; kk < n; ++kk)
            out << (kk ? "," : "") << fmt_num(g.h(kk, kk).real());
          out << "\n";
          break;
        }
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          if (std::abs(g.h(i, j)) > 0)
            out << "h.hop = " << i + 1 << "," << j + 1 << "," << fmt_num(g.h(i, j).real())
                << "\n";
      if (g.has_pump()) {
        out << "xi = ";
        for (Index k = 0; k < n; ++k) out << (k ? "," : "") << fmt_complex(g.xi(k));
        out << "\n";
      }
      // diagonal-bath form when the rates match one
      bool wrote_bath = false;
      if (g.gamma_down.size()) {
        bool diag = (g.gamma_up.size() == 0 ||
                     (g.gamma_up - Matrix(g.gamma_up.diagonal().asDiagonal()))
                             .cwiseAbs()
                             .maxCoeff() == 0) &&
                    (g.gamma_down - Matrix(g.gamma_down.diagonal().asDiagonal()))
                            .cwiseAbs()
                            .maxCoeff() == 0;
        if (diag) {
          std::vector<Index> coupled;
          double rate = 0, nom = -1;
          bool uniform = true;
          for (Index k = 0; k < n; ++k) {
            double dw = g.gamma_down(k, k).real();
            double up = g.gamma_up.size() ? g.gamma_up(k, k).real() : 0.0;
            if (dw == 0 && up == 0) continue;
            double r = dw - up;  // gamma_omega
            double nn = r > 0 ? up / r : -1;
            if (coupled.empty()) {
              rate = r;
              nom = nn;
            } else if (std::abs(r - rate) > 1e-14 || std::abs(nn - nom) > 1e-14) {
              uniform = false;
            }
            coupled.push_back(k);
          }
          if (uniform && !coupled.empty() && rate > 0 && nom >= 0) {
            out << "bath.n = " << fmt_num(nom) << "\nbath.rate = " << fmt_num(rate)
                << "\nbath.modes = " << join_modes(coupled) << "\n";
            wrote_bath = true;
          }
        }
      }
      if (!wrote_bath && ((g.gamma_up.size() && g.gamma_up.cwiseAbs().maxCoeff() > 0) ||
                          (g.gamma_down.size() && g.gamma_down.cwiseAbs().maxCoeff() > 0)))
        throw std::invalid_argument(
            "serialize_scenario: only thermal-bath rate matrices are representable");
      if (g.hs.size())
        for (Index i = 0; i < n; ++i)
          for (Index j = i; j < n; ++j)
            if (std::abs(g.hs(i, j)) > 0)
              out << "squeeze = " << i + 1 << "," << j + 1 << ","
                  << fmt_num(g.hs(i, j).real()) << "\n";
      if (!g.scattering.empty())
        throw std::invalid_argument(
            "serialize_scenario: scattering channels are not representable in config text");
    } else if (const auto* b = std::get_if<BeamsplitterStep>(&step)) {
      out << "\n[beamsplitter]\nmodes = " << b->i + 1 << "," << b->j + 1
          << "\nt = " << fmt_num(b->transmissivity) << "\n";
    } else if (const auto* ph = std::get_if<PhaseStep>(&step)) {
      out << "\n[phase]\nmode = " << ph->mode + 1 << "\ndphi = " << fmt_num(ph->dphi)
          << "\n";
    } else if (const auto* e = std::get_if<EfficiencyStep>(&step)) {
      out << "\n[efficiency]\neta = ";
      for (Index k = 0; k < e->etas.size(); ++k)
        out << (k ? "," : "") << fmt_num(e->etas(k));
      out << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// running
// ---------------------------------------------------------------------------

namespace {

ReducedState apply_element(const ReducedState& s, const PipelineStep& step) {
  if (const auto* b = std::get_if<BeamsplitterStep>(&step))
    return apply_mode_unitary(
        s, beamsplitter_unitary(b->transmissivity, b->i, b->j, s.n_modes));
  if (const auto* p = std::get_if<PhaseStep>(&step))
    return phase_shifter(s, p->mode, p->dphi);
  if (const auto* e = std::get_if<EfficiencyStep>(&step))
    return detector_efficiency(s, e->etas);
  throw std::logic_error("apply_element: not an element");
}

struct ColumnPlan {
  std::vector<std::string> names;
  // fills everything except the critical-time column
  std::function<std::vector<double>(const ReducedState&)> eval;
  int critical_col = -1;
};

ColumnPlan plan_columns(const Scenario& s) {
  ColumnPlan plan;
  const auto& o = s.observables;
  plan.names.push_back("t");
  if (o.occupations)
    for (Index k = 0; k < s.n_modes; ++k)
      plan.names.push_back("n_" + std::to_string(k + 1));
  if (o.ppt) plan.names.push_back("ppt_min");
  if (o.covariance_ppt) plan.names.push_back("cov_ppt_min");
  for (Index m : o.mandel) plan.names.push_back("mandel_q_" + std::to_string(m + 1));
  for (auto [i, j] : o.gen_q)
    plan.names.push_back("gen_q_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  if (o.entropy) plan.names.push_back("entropy");
  if (o.critical_time) {
    plan.critical_col = static_cast<int>(plan.names.size());
    plan.names.push_back("critical_time");
  }
  auto bp = s.bipartition;
  plan.eval = [o, bp, n = s.n_modes](const ReducedState& st) {
    std::vector<double> row;
    if (o.occupations)
      for (Index k = 0; k < n; ++k) row.push_back(st.rho(k, k).real());
    if (o.ppt) row.push_back(ppt_report(st, *bp).min_eigenvalue);
    if (o.covariance_ppt)
      row.push_back(covariance_ppt(covariance_from_reduced(st), *bp).minCoeff());
    for (Index m : o.mandel) row.push_back(mandel_q(st, m));
    for (auto [i, j] : o.gen_q) row.push_back(gen_q(st, i, j));
    if (o.entropy) row.push_back(rsf_entropy(st));
    return row;
  };
  return plan;
}

// pipeline shape: leading elements, then contiguous evolution segments only
bool prep_then_evolve(const Scenario& s) {
  bool seen_evolve = false;
  for (const auto& step : s.pipeline) {
    bool is_evolve = std::holds_alternative<EvolveStep>(step);
    if (is_evolve)
      seen_evolve = true;
    else if (seen_evolve)
      return false;
  }
  return true;
}

std::vector<Segment> evolve_segments(const Scenario& s) {
  std::vector<Segment> segs;
  for (const auto& step : s.pipeline)
    if (const auto* ev = std::get_if<EvolveStep>(&step))
      segs.push_back({ev->generator, ev->duration});
  return segs;
}

std::vector<ReducedState> reduced_states_on_grid(const Scenario& s,
                                                 const std::vector<double>& grid,
                                                 std::vector<Segment>* segments_out) {
  ReducedState state = build(s.initial);
  IntegrateOptions opts{s.dt};

  if (s.uses_squeezing()) {
    if (!prep_then_evolve(s))
      throw std::invalid_argument(
          "run_scenario: squeezing pipelines must apply optical elements before evolution");
    switch (s.initial.kind) {
      case StatePreset::Kind::Vacuum:
      case StatePreset::Kind::Fock:
      case StatePreset::Kind::Thermal:
      case StatePreset::Kind::SinglePhotonSplit:
        break;
      default:
        throw std::invalid_argument(
            "run_scenario: squeezing requires a number-diagonal initial state "
            "(its three-operator and four-annihilation moments must vanish)");
    }
    for (const auto& step : s.pipeline)
      if (!std::holds_alternative<EvolveStep>(step)) state = apply_element(state, step);
    auto traj = integrate_second_order(SecondOrderState::extend(state),
                                       evolve_segments(s), grid, opts);
    std::vector<ReducedState> out;
    out.reserve(traj.states.size());
    for (auto& st : traj.states) out.push_back(st.base);
    if (segments_out) segments_out->clear();
    return out;
  }

  if (prep_then_evolve(s)) {
    for (const auto& step : s.pipeline)
      if (!std::holds_alternative<EvolveStep>(step)) state = apply_element(state, step);
    auto segs = evolve_segments(s);
    if (segs.empty()) {
      if (segments_out) segments_out->clear();
      return {state};
    }
    Trajectory traj = integrate(state, segs, grid, opts);
    if (segments_out) *segments_out = segs;
    return traj.states;
  }

  // interleaved pipeline: walk it, sampling inside evolution windows
  std::vector<ReducedState> out;
  std::size_t gi = 0;
  double t = 0.0;
  auto emit_until = [&](double t_end) {
    while (gi < grid.size() && grid[gi] <= t_end + 1e-12) {
      out.push_back(state);
      ++gi;
    }
  };
  for (const auto& step : s.pipeline) {
    if (const auto* ev = std::get_if<EvolveStep>(&step)) {
      double seg_end = t + ev->duration;
      std::vector<Segment> seg{{ev->generator, ev->duration}};
      while (gi < grid.size() && grid[gi] <= seg_end + 1e-12) {
        state = integrate_between(state, seg, t - (seg_end - ev->duration),
                                  grid[gi] - (seg_end - ev->duration), opts);
        t = grid[gi];
        out.push_back(state);
        ++gi;
      }
      if (t < seg_end) {
        state = integrate_between(state, seg, t - (seg_end - ev->duration),
                                  ev->duration, opts);
        t = seg_end;
      }
    } else {
      state = apply_element(state, step);
    }
  }
  emit_until(grid.empty() ? 0.0 : grid.back());
  if (out.size() != grid.size())
    throw std::logic_error("run_scenario: grid walk out of sync");
  return out;
}

}  // namespace

ResultTable run_scenario(const Scenario& s) {
  s.initial.validate();
  if (s.initial.n_modes != s.n_modes)
    throw std::invalid_argument("run_scenario: initial state mode count mismatch");
  if (s.bipartition && s.bipartition->max_mode() >= s.n_modes)
    throw std::invalid_argument("run_scenario: bipartition mode out of range");
  if (s.observables.critical_time && !prep_then_evolve(s))
    throw std::invalid_argument(
        "run_scenario: critical_time requires optical elements only before evolution");
  if (s.observables.critical_time && s.uses_squeezing())
    throw std::invalid_argument("run_scenario: critical_time with squeezing unsupported");

  double total = s.total_duration();
  std::vector<double> grid =
      total > 0 ? uniform_grid(total, s.samples) : std::vector<double>{0.0};

  std::vector<Segment> segments;
  std::vector<ReducedState> states = reduced_states_on_grid(s, grid, &segments);

  ColumnPlan plan = plan_columns(s);
  double tc = std::nan("");
  if (s.observables.critical_time && !segments.empty()) {
    Trajectory traj;
    traj.times = grid;
    traj.states = states;
    traj.segments = segments;
    if (auto t = critical_time(traj, *s.bipartition)) tc = *t;
  }

  ResultTable table;
  table.columns = plan.names;
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::vector<double> row;
    row.push_back(grid[i]);
    try {
      auto vals = plan.eval(states[i]);
      row.insert(row.end(), vals.begin(), vals.end());
    } catch (const std::exception& e) {
      throw std::runtime_error("scenario row at t = " + std::to_string(grid[i]) + ": " +
                               e.what());
    }
    if (plan.critical_col >= 0) row.push_back(tc);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_csv(const ResultTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

void emit_csv(const ResultTable& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  emit_csv(table, f);
}

// ---------------------------------------------------------------------------
// oracle comparison
// ---------------------------------------------------------------------------

std::string OracleReport::summary() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " (tolerance " << tolerance << ")\n";
  for (const auto& b : blocks)
    out << "  " << b.block << ": max |dev| = " << b.max_abs << " at (" << b.row << ","
        << b.col << "), t = " << b.at_time << "\n";
  return out.str();
}

OracleReport oracle_check(const Scenario& s, Index cutoff, double tol) {
  for (const auto& step : s.pipeline)
    if (std::holds_alternative<EfficiencyStep>(step))
      throw std::invalid_argument("oracle_check: efficiency steps have no unitary lift");

  double total = s.total_duration();
  std::vector<double> grid =
      total > 0 ? uniform_grid(total, s.samples) : std::vector<double>{0.0};

  std::vector<ReducedState> reduced = reduced_states_on_grid(s, grid, nullptr);

  // Fock side walks the identical pipeline
  FockBasis basis(s.n_modes, cutoff);
  FockState f = prepare(basis, s.initial);
  std::vector<ReducedState> oracle;
  oracle.reserve(grid.size());
  std::size_t gi = 0;
  double t = 0.0;
  FockEvolveOptions fopts;
  fopts.dt = s.dt;
  auto emit_static = [&](double t_end) {
    while (gi < grid.size() && grid[gi] <= t_end + 1e-12) {
      oracle.push_back(reduce_from_fock(f));
      ++gi;
    }
  };
  if (total == 0.0) {
    for (const auto& step : s.pipeline) {
      const Matrix* u = nullptr;
      Matrix tmp;
      if (const auto* b = std::get_if<BeamsplitterStep>(&step))
        tmp = beamsplitter_unitary(b->transmissivity, b->i, b->j, s.n_modes), u = &tmp;
      else if (const auto* p = std::get_if<PhaseStep>(&step)) {
        tmp = Matrix::Identity(s.n_modes, s.n_modes);
        tmp(p->mode, p->mode) = std::exp(kI * p->dphi);
        u = &tmp;
      }
      if (u) {
        Matrix lift = basis.lift_mode_unitary(*u);
        f.rho = lift * f.rho * lift.adjoint();
      }
    }
    emit_static(0.0);
  } else {
    for (const auto& step : s.pipeline) {
      if (const auto* ev = std::get_if<EvolveStep>(&step)) {
        double seg_end = t + ev->duration;
        std::vector<double> local;
        while (gi + local.size() < grid.size() &&
               grid[gi + local.size()] <= seg_end + 1e-12)
          local.push_back(grid[gi + local.size()] - t);
        if (!local.empty() || ev->duration > 0) {
          std::vector<double> path = local;
          if (path.empty() || path.back() < ev->duration - 1e-12)
            path.push_back(ev->duration);
          auto stepped = evolve_fock(f, ev->generator, path, fopts);
          for (std::size_t k = 0; k < local.size(); ++k)
            oracle.push_back(reduce_from_fock(stepped[k]));
          gi += local.size();
          f = stepped.back();
        }
        t = seg_end;
      } else {
        const Matrix* u = nullptr;
        Matrix tmp;
        if (const auto* b = std::get_if<BeamsplitterStep>(&step))
          tmp = beamsplitter_unitary(b->transmissivity, b->i, b->j, s.n_modes), u = &tmp;
        else if (const auto* p = std::get_if<PhaseStep>(&step)) {
          tmp = Matrix::Identity(s.n_modes, s.n_modes);
          tmp(p->mode, p->mode) = std::exp(kI * p->dphi);
          u = &tmp;
        }
        if (u) {
          Matrix lift = basis.lift_mode_unitary(*u);
          f.rho = lift * f.rho * lift.adjoint();
        }
      }
    }
    emit_static(grid.back());
  }
  if (oracle.size() != reduced.size())
    throw std::logic_error("oracle_check: grid walk out of sync");

  OracleReport rep;
  rep.tolerance = tol;
  BlockDeviation dev_rho{"rho", 0, 0, 0, 0}, dev_alpha{"alpha", 0, 0, 0, 0},
      dev_r{"r", 0, 0, 0, 0}, dev_rho4{"rho4", 0, 0, 0, 0}, dev_beta{"beta", 0, 0, 0, 0};
  auto scan = [&](BlockDeviation& dev, const Matrix& a, const Matrix& b, double at) {
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) {
        double d = std::abs(a(i, j) - b(i, j));
        if (d > dev.max_abs) dev = {dev.block, d, i, j, at};
      }
  };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    scan(dev_rho, reduced[k].rho, oracle[k].rho, grid[k]);
    scan(dev_alpha, reduced[k].alpha, oracle[k].alpha, grid[k]);
    scan(dev_r, reduced[k].r, oracle[k].r, grid[k]);
    scan(dev_rho4, reduced[k].rho4, oracle[k].rho4, grid[k]);
    scan(dev_beta, reduced[k].beta, oracle[k].beta, grid[k]);
  }
  rep.blocks = {dev_rho, dev_alpha, dev_r, dev_rho4, dev_beta};
  for (const auto& b : rep.blocks) rep.worst = std::max(rep.worst, b.max_abs);
  rep.pass = rep.worst <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// bundled scenarios
// ---------------------------------------------------------------------------

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback, std::vector<std::string>* known) {
  known->push_back(key);
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    const std::vector<std::string>& known, const std::string& name) {
  for (const auto& [k, v] : params)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("scenario '" + name + "' does not take parameter '" + k + "'");
}

Scenario thermal_scenario(const StatePreset& initial, const Bipartition& bp,
                          std::vector<Index> bath_modes, double n, double rate,
                          double t_max, int samples) {
  Scenario s;
  s.n_modes = initial.n_modes;
  s.initial = initial;
  s.bipartition = bp;
  s.samples = samples;
  s.observables.ppt = true;
  s.observables.critical_time = true;
  s.observables.occupations = true;
  ThermalBathSpec bath{n, rate, std::move(bath_modes)};
  EvolveStep ev;
  ev.generator = bath_generator(bath, s.n_modes);
  ev.duration = t_max;
  s.pipeline.emplace_back(std::move(ev));
  return s;
}

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  return {"bsv_thermal",   "single_photon_thermal", "bsv_stationary",
          "thermal_limit", "split_gen_q",           "beamsplit_statistics"};
}

Scenario bundled_scenario(const std::string& name,
                          const std::map<std::string, double>& params) {
  std::vector<std::string> known;
  auto p = [&](const std::string& key, double fallback) {
    return param(params, key, fallback, &known);
  };
  Scenario s;
  if (name == "bsv_thermal" || name == "bsv_stationary" || name == "thermal_limit") {
    double gain = p("gain", 1.0);
    double n = name == "bsv_stationary" ? p("n", 0.0) : p("n", 0.1);
    double rate = p("rate", 1.0);
    double t_max = p("t_max", name == "thermal_limit" ? 20.0 : 5.0);
    int samples = static_cast<int>(p("samples", 200));
    s = thermal_scenario(StatePreset::bsv(gain), Bipartition({0, 1}, {2, 3}),
                         {0, 1, 2, 3}, n, rate, t_max, samples);
  } else if (name == "single_photon_thermal") {
    double alpha = p("alpha", 0.5);
    double n = p("n", 0.1);
    double rate = p("rate", 1.0);
    double t_max = p("t_max", 5.0);
    int samples = static_cast<int>(p("samples", 200));
    // thermal noise acts on the transmitted photon modes only
    s = thermal_scenario(StatePreset::single_photon_weak_homodyne(alpha),
                         Bipartition({0, 1}, {2, 3}), {0, 2}, n, rate, t_max, samples);
  } else if (name == "split_gen_q") {
    double n = p("n", 0.1);
    double rate = p("rate", 1.0);
    double t_max = p("t_max", 5.0);
    int samples = static_cast<int>(p("samples", 400));
    s.n_modes = 2;
    s.initial = StatePreset::single_photon_split({0, 1}, 2);
    s.samples = samples;
    s.observables.occupations = true;
    s.observables.gen_q = {{0, 1}, {1, 0}};
    EvolveStep ev;
    ev.generator = bath_generator(ThermalBathSpec{n, rate, {0, 1}}, 2);
    ev.duration = t_max;
    s.pipeline.emplace_back(std::move(ev));
  } else if (name == "beamsplit_statistics") {
    int n_fock = static_cast<int>(p("n_fock", 1));
    double t = p("t", 0.5);
    s.n_modes = 2;
    s.initial = StatePreset::fock({n_fock, 0});
    s.samples = 1;
    s.observables.occupations = true;
    s.observables.mandel = {0, 1};
    s.observables.gen_q = {{0, 1}, {1, 0}};
    s.pipeline.emplace_back(BeamsplitterStep{0, 1, t});
  } else {
    throw ConfigError("unknown bundled scenario '" + name + "'");
  }
  reject_unknown(params, known, name);
  return s;
}

}  // namespace rsf
