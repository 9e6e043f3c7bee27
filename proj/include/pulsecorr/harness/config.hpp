#pragma once

// Run configuration: YAML schema, validation, overrides and serialization.
//
//   params:      physical parameters (kappa units)
//   simulation:  frame, dt, log_base, jobs
//   sweeps:      list of sweep specifications
//   optimize:    (g, tau) grid for the heating-tolerance search
//   output:      dir, stem, formats, plot
//
// Unknown keys are rejected. Scalar keys can be overridden by
// PULSECORR_<SECTION>__<KEY> environment variables or by "section.key=value"
// strings; both are applied to the document before it is validated.

#include "pulsecorr/measures.hpp"
#include "pulsecorr/model.hpp"
#include "pulsecorr/protocol.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pulsecorr::harness {

/// Malformed document or a value of the wrong type.
class ParseError : public Error {
 public:
  ParseError(const std::string& key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(key), line_(line) {}
  [[nodiscard]] const std::string& key() const { return key_; }
  [[nodiscard]] int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string out = "config parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!key.empty()) out += " (key '" + key + "')";
    return out + ": " + what;
  }
  std::string key_;
  int line_;
};

/// Well-formed document that violates the schema; lists every problem found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(format(problems)), problems_(std::move(problems)) {}
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string format(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }
  std::vector<std::string> problems_;
};

enum class Scale { Linear, Log10 };
enum class Bipartition { PulseMech, PulsePulse };
enum class Model { Full, Adiabatic };

struct EnsembleSpec {
  std::size_t n = 40;
  double rel_width = 0.1;
  std::uint64_t seed = 1;
  bool operator==(const EnsembleSpec&) const = default;
};

struct SweepSpec {
  std::string name;
  std::string variable = "Gamma";
  Scale scale = Scale::Log10;
  double lo = 1e-4;
  double hi = 1.0;
  std::size_t points = 25;
  std::vector<std::string> targets = {"S_db", "E_N"};
  std::optional<Frame> frame;  // unset: simulation.frame
  Bipartition bipartition = Bipartition::PulseMech;
  Model model = Model::Full;
  AngleScanMode angle_mode = AngleScanMode::ReoptimizePhi;
  std::optional<EnsembleSpec> ensemble;
  std::map<std::string, double> overrides;  // parameter values for this sweep only
  bool operator==(const SweepSpec&) const = default;
};

struct SimulationSpec {
  Frame frame = Frame::RWA;
  double dt = 0.0;  // <= 0: automatic
  LogBase log_base = LogBase::Natural;
  std::size_t jobs = 0;  // 0: logical cores
  bool operator==(const SimulationSpec&) const = default;
};

struct OptimizeSpec {
  double g_min = 0.1;
  double g_max = 0.6;
  std::size_t g_points = 6;
  double tau_min = 1.0;
  double tau_max = 16.0;
  std::size_t tau_points = 6;
  std::string target = "S_db";
  bool operator==(const OptimizeSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  std::string stem = "pulsecorr";
  std::vector<std::string> formats = {"csv"};
  bool plot = false;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  SystemParams params;
  bool tau_R_follows_tau = true;  // readout duration tracks tau unless set
  SimulationSpec simulation;
  std::vector<SweepSpec> sweeps;
  OptimizeSpec optimize;
  OutputSpec output;
  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------- names

inline const std::vector<std::string>& parameter_keys() {
  static const std::vector<std::string> keys = {"kappa", "g",   "omega", "gamma", "n_th",  "Gamma", "n0",
                                                "eta",   "eta_B", "eta_R", "tau", "tau_D", "tau_R"};
  return keys;
}

inline const std::vector<std::string>& sweep_variables() {
  static const std::vector<std::string> v = {"Gamma", "g",     "tau",   "n0",    "eta",  "eta_B",
                                             "eta_R", "omega", "tau_D", "tau_R", "theta_B"};
  return v;
}

inline const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> v = {"S_db", "E_N", "nu_minus", "lambda_min"};
  return v;
}

inline std::string to_string(Frame f) {
  switch (f) {
    case Frame::Lab: return "lab";
    case Frame::RWA: return "rwa";
    case Frame::BeyondRWA: return "beyond_rwa";
  }
  return "";
}
inline std::string to_string(Scale s) { return s == Scale::Linear ? "linear" : "log10"; }
inline std::string to_string(Bipartition b) { return b == Bipartition::PulseMech ? "pulse_mech" : "pulse_pulse"; }
inline std::string to_string(Model m) { return m == Model::Full ? "full" : "adiabatic"; }
inline std::string to_string(LogBase b) { return b == LogBase::Natural ? "natural" : "two"; }
inline std::string to_string(AngleScanMode m) {
  switch (m) {
    case AngleScanMode::Hold: return "hold";
    case AngleScanMode::ReoptimizePhi: return "reoptimize_phi";
    case AngleScanMode::ReoptimizeAll: return "reoptimize_all";
  }
  return "";
}

namespace detail {

template <typename E>
std::optional<E> parse_enum(const std::string& s, std::initializer_list<E> values) {
  for (E v : values)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ParseError(key, line_of(n), "expected a scalar value");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(key, line_of(n), "cannot interpret '" + n.Scalar() + "'");
  }
}

inline double number(const YAML::Node& n, const std::string& key) { return scalar<double>(n, key); }

inline std::vector<std::string> string_list(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {n.Scalar()};
  if (!n.IsSequence()) throw ParseError(key, line_of(n), "expected a list");
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(scalar<std::string>(item, key));
  return out;
}

inline void check_keys(const YAML::Node& map, const std::string& where, const std::vector<std::string>& allowed,
                       std::vector<std::string>& problems) {
  for (const auto& kv : map) {
    const auto key = kv.first.Scalar();
    if (contains(allowed, key)) continue;
    const int line = line_of(kv.first);
    problems.push_back("unknown key '" + (where.empty() ? key : where + "." + key) + "'" +
                       (line > 0 ? " at line " + std::to_string(line) : std::string(" (override)")));
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Sets one named physical parameter. Gamma keeps the current damping rate
/// and adjusts n_th; eta sets both transmittances; tau drags tau_R along
/// when the readout follows the entangling pulse.
inline void set_parameter(SystemParams& p, bool tau_R_follows_tau, const std::string& key, double v) {
  if (key == "kappa") p.kappa = v;
  else if (key == "g") p.g = v;
  else if (key == "omega") p.omega = v;
  else if (key == "gamma") p.gamma = v;
  else if (key == "n_th") p.n_th = v;
  else if (key == "Gamma") p.set_reheating(v, p.gamma > 0.0 ? p.gamma : kDefaultGammaFloor);
  else if (key == "n0") p.n0 = v;
  else if (key == "eta") p.eta_B = p.eta_R = v;
  else if (key == "eta_B") p.eta_B = v;
  else if (key == "eta_R") p.eta_R = v;
  else if (key == "tau") {
    p.tau = v;
    if (tau_R_follows_tau) p.tau_R = v;
  } else if (key == "tau_D") p.tau_D = v;
  else if (key == "tau_R") p.tau_R = v;
  else throw InvalidArgument("unknown parameter '" + key + "'");
}

// ---------------------------------------------------------------- overrides

/// Sets `section.key` (or `key` for a top-level scalar) to a YAML-parsed value.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError(assignment, 0, "override must look like section.key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const auto dot = path.find('.');
  if (dot == std::string::npos || path.find('.', dot + 1) != std::string::npos)
    throw ParseError(path, 0, "override path must be section.key");
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ParseError(path, 0, std::string("cannot parse override value: ") + e.what());
  }
  if (!root.IsMap()) root = YAML::Node(YAML::NodeType::Map);
  const std::string section = path.substr(0, dot);
  if (!root[section].IsMap()) root[section] = YAML::Node(YAML::NodeType::Map);
  YAML::Node sec = root[section];
  sec[path.substr(dot + 1)] = parsed;
}

inline const std::map<std::string, std::vector<std::string>>& scalar_schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"params", parameter_keys()},
      {"simulation", {"frame", "dt", "log_base", "jobs"}},
      {"optimize", {"g_min", "g_max", "g_points", "tau_min", "tau_max", "tau_points", "target"}},
      {"output", {"dir", "stem", "formats", "plot"}},
  };
  return s;
}

/// Turns PULSECORR_SECTION__KEY=value entries (matched case-insensitively
/// against the schema) into section.key=value overrides.
inline std::vector<std::string> environment_overrides(const std::vector<std::string>& environment,
                                                      const std::string& prefix = "PULSECORR_") {
  std::vector<std::string> out;
  std::vector<std::string> problems;
  for (const auto& entry : environment) {
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const auto sep = name.find("__");
    std::string resolved;
    if (sep != std::string::npos) {
      const auto section = detail::lower(name.substr(0, sep));
      const auto key = detail::lower(name.substr(sep + 2));
      auto it = scalar_schema().find(section);
      if (it != scalar_schema().end()) {
        for (const auto& k : it->second)
          if (detail::lower(k) == key) resolved = section + "." + k;
        // gamma and Gamma differ only in case: the reheating rate needs the exact spelling.
        if (section == "params" && key == "gamma") resolved = name.substr(sep + 2) == "Gamma" ? "params.Gamma" : "params.gamma";
      }
    }
    if (resolved.empty()) problems.push_back("unknown environment override " + entry.substr(0, eq));
    else out.push_back(resolved + "=" + entry.substr(eq + 1));
  }
  if (!problems.empty()) throw ValidationError(problems);
  return out;
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline SweepSpec parse_sweep(const YAML::Node& n, std::size_t index, std::vector<std::string>& problems) {
  const std::string where = "sweeps[" + std::to_string(index) + "]";
  SweepSpec s;
  s.name = "sweep" + std::to_string(index);
  if (!n.IsMap()) throw ParseError(where, line_of(n), "each sweep must be a mapping");
  check_keys(n, where,
             {"name", "variable", "scale", "range", "points", "targets", "frame", "bipartition", "model",
              "angle_mode", "ensemble", "overrides"},
             problems);
  auto key = [&](const char* k) { return where + "." + k; };
  if (n["name"]) s.name = scalar<std::string>(n["name"], key("name"));
  if (n["variable"]) s.variable = scalar<std::string>(n["variable"], key("variable"));
  if (n["scale"]) {
    const auto v = scalar<std::string>(n["scale"], key("scale"));
    if (auto e = parse_enum<Scale>(v, {Scale::Linear, Scale::Log10})) s.scale = *e;
    else problems.push_back(key("scale") + " must be linear or log10");
  }
  if (n["range"]) {
    const auto r = n["range"];
    if (!r.IsSequence() || r.size() != 2) throw ParseError(key("range"), line_of(r), "range must be [lo, hi]");
    s.lo = number(r[0], key("range"));
    s.hi = number(r[1], key("range"));
  }
  if (n["points"]) {
    const auto pts = scalar<long long>(n["points"], key("points"));
    if (pts < 0) problems.push_back(key("points") + " must be >= 2");
    s.points = static_cast<std::size_t>(std::max(0LL, pts));
  }
  if (n["targets"]) s.targets = string_list(n["targets"], key("targets"));
  if (n["frame"]) {
    const auto v = scalar<std::string>(n["frame"], key("frame"));
    if (auto e = parse_enum<Frame>(v, {Frame::RWA, Frame::BeyondRWA})) s.frame = *e;
    else problems.push_back(key("frame") + " must be rwa or beyond_rwa");
  }
  if (n["bipartition"]) {
    const auto v = scalar<std::string>(n["bipartition"], key("bipartition"));
    if (auto e = parse_enum<Bipartition>(v, {Bipartition::PulseMech, Bipartition::PulsePulse})) s.bipartition = *e;
    else problems.push_back(key("bipartition") + " must be pulse_mech or pulse_pulse");
  }
  if (n["model"]) {
    const auto v = scalar<std::string>(n["model"], key("model"));
    if (auto e = parse_enum<Model>(v, {Model::Full, Model::Adiabatic})) s.model = *e;
    else problems.push_back(key("model") + " must be full or adiabatic");
  }
  if (n["angle_mode"]) {
    const auto v = scalar<std::string>(n["angle_mode"], key("angle_mode"));
    if (auto e = parse_enum<AngleScanMode>(
            v, {AngleScanMode::Hold, AngleScanMode::ReoptimizePhi, AngleScanMode::ReoptimizeAll}))
      s.angle_mode = *e;
    else problems.push_back(key("angle_mode") + " must be hold, reoptimize_phi or reoptimize_all");
  }
  if (n["ensemble"]) {
    const auto e = n["ensemble"];
    if (!e.IsMap()) throw ParseError(key("ensemble"), line_of(e), "ensemble must be a mapping");
    check_keys(e, key("ensemble"), {"n", "rel_width", "seed"}, problems);
    EnsembleSpec spec;
    if (e["n"]) {
      const auto cnt = scalar<long long>(e["n"], key("ensemble.n"));
      if (cnt < 1) problems.push_back(key("ensemble.n") + " must be >= 1");
      spec.n = static_cast<std::size_t>(std::max(1LL, cnt));
    }
    if (e["rel_width"]) spec.rel_width = number(e["rel_width"], key("ensemble.rel_width"));
    if (e["seed"]) spec.seed = scalar<std::uint64_t>(e["seed"], key("ensemble.seed"));
    if (!(spec.rel_width >= 0.0 && spec.rel_width < 1.0)) problems.push_back(key("ensemble.rel_width") + " must lie in [0, 1)");
    s.ensemble = spec;
  }
  if (n["overrides"]) {
    const auto o = n["overrides"];
    if (!o.IsMap()) throw ParseError(key("overrides"), line_of(o), "overrides must be a mapping");
    check_keys(o, key("overrides"), parameter_keys(), problems);
    for (const auto& kv : o) {
      const auto k = kv.first.Scalar();
      if (contains(parameter_keys(), k)) s.overrides[k] = number(kv.second, key("overrides") + "." + k);
    }
  }

  if (!contains(sweep_variables(), s.variable)) problems.push_back(key("variable") + " '" + s.variable + "' is not sweepable");
  if (!(s.lo < s.hi)) problems.push_back(key("range") + " needs lo < hi");
  if (s.points < 2) problems.push_back(key("points") + " must be >= 2");
  if (s.scale == Scale::Log10 && !(s.lo > 0.0)) problems.push_back(key("range") + " needs lo > 0 on a log10 scale");
  for (const auto& t : s.targets)
    if (!contains(measure_names(), t)) problems.push_back(key("targets") + " has unknown measure '" + t + "'");
  if (s.variable == "theta_B" && s.model == Model::Adiabatic)
    problems.push_back(key("model") + ": theta_B scans need the full model");
  if (s.variable == "theta_B" && s.ensemble) problems.push_back(key("ensemble") + ": not supported for theta_B scans");
  if (s.model == Model::Adiabatic && s.ensemble) problems.push_back(key("ensemble") + ": needs the full model");
  if (s.variable == "theta_B" && s.points > 1 && !(s.hi - s.lo <= 2.0 * std::numbers::pi))
    problems.push_back(key("range") + ": theta_B scans cover at most 2 pi");
  return s;
}

}  // namespace detail

/// Builds a validated RunConfig from a parsed document.
inline RunConfig config_from_yaml(const YAML::Node& root) {
  using namespace detail;
  RunConfig cfg;
  std::vector<std::string> problems;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw ParseError("", line_of(root), "top level must be a mapping");
  check_keys(root, "", {"params", "simulation", "sweeps", "optimize", "output"}, problems);

  if (const auto p = root["params"]; p && !p.IsNull()) {
    if (!p.IsMap()) throw ParseError("params", line_of(p), "params must be a mapping");
    check_keys(p, "params", parameter_keys(), problems);
    auto get = [&](const char* k) -> std::optional<double> {
      if (!p[k]) return std::nullopt;
      return number(p[k], std::string("params.") + k);
    };
    auto& sp = cfg.params;
    for (const char* k : {"kappa", "g", "omega", "n0", "tau", "tau_D"})
      if (auto v = get(k)) set_parameter(sp, true, k, *v);
    if (auto v = get("eta")) {
      if (!(*v >= 0.0 && *v <= 1.0)) problems.push_back("params.eta must lie in [0, 1]");
      if (p["eta_B"] || p["eta_R"]) problems.push_back("params.eta cannot be combined with eta_B or eta_R");
      sp.eta_B = sp.eta_R = *v;
    }
    if (auto v = get("eta_B")) sp.eta_B = *v;
    if (auto v = get("eta_R")) sp.eta_R = *v;
    if (auto v = get("tau_R")) {
      sp.tau_R = *v;
      cfg.tau_R_follows_tau = false;
    }
    // Thermal bath: Gamma = gamma n_th; without an explicit value the default reheating rate is kept.
    const double default_reheating = SystemParams{}.reheating();
    const auto gamma = get("gamma");
    const auto n_th = get("n_th");
    const auto reheating = get("Gamma");
    if (reheating && n_th) problems.push_back("params.Gamma cannot be combined with params.n_th");
    if (gamma) sp.gamma = *gamma;
    if (n_th) sp.n_th = *n_th;
    else sp.n_th = sp.gamma > 0.0 ? reheating.value_or(default_reheating) / sp.gamma : 0.0;
    if (reheating && !(*reheating >= 0.0)) problems.push_back("params.Gamma must be >= 0");
    if (reheating && *reheating > 0.0 && !(sp.gamma > 0.0)) problems.push_back("params.Gamma > 0 needs gamma > 0");
  }
  for (const auto& v : cfg.params.violations()) problems.push_back("params: " + v);

  if (const auto s = root["simulation"]; s && !s.IsNull()) {
    if (!s.IsMap()) throw ParseError("simulation", line_of(s), "simulation must be a mapping");
    check_keys(s, "simulation", scalar_schema().at("simulation"), problems);
    if (s["frame"]) {
      const auto v = scalar<std::string>(s["frame"], "simulation.frame");
      if (auto e = parse_enum<Frame>(v, {Frame::RWA, Frame::BeyondRWA})) cfg.simulation.frame = *e;
      else problems.push_back("simulation.frame must be rwa or beyond_rwa");
    }
    if (s["dt"]) cfg.simulation.dt = number(s["dt"], "simulation.dt");
    if (s["log_base"]) {
      const auto v = scalar<std::string>(s["log_base"], "simulation.log_base");
      if (auto e = parse_enum<LogBase>(v, {LogBase::Natural, LogBase::Two})) cfg.simulation.log_base = *e;
      else problems.push_back("simulation.log_base must be natural or two");
    }
    if (s["jobs"]) {
      const auto j = scalar<long long>(s["jobs"], "simulation.jobs");
      if (j < 0) problems.push_back("simulation.jobs must be >= 0");
      cfg.simulation.jobs = static_cast<std::size_t>(std::max(0LL, j));
    }
  }

  if (const auto sw = root["sweeps"]; sw && !sw.IsNull()) {
    if (!sw.IsSequence()) throw ParseError("sweeps", line_of(sw), "sweeps must be a list");
    for (std::size_t i = 0; i < sw.size(); ++i) cfg.sweeps.push_back(parse_sweep(sw[i], i, problems));
    for (std::size_t i = 0; i < cfg.sweeps.size(); ++i)
      for (std::size_t j = i + 1; j < cfg.sweeps.size(); ++j)
        if (cfg.sweeps[i].name == cfg.sweeps[j].name) problems.push_back("duplicate sweep name '" + cfg.sweeps[i].name + "'");
  }

  if (const auto o = root["optimize"]; o && !o.IsNull()) {
    if (!o.IsMap()) throw ParseError("optimize", line_of(o), "optimize must be a mapping");
    check_keys(o, "optimize", scalar_schema().at("optimize"), problems);
    auto& op = cfg.optimize;
    if (o["g_min"]) op.g_min = number(o["g_min"], "optimize.g_min");
    if (o["g_max"]) op.g_max = number(o["g_max"], "optimize.g_max");
    if (o["tau_min"]) op.tau_min = number(o["tau_min"], "optimize.tau_min");
    if (o["tau_max"]) op.tau_max = number(o["tau_max"], "optimize.tau_max");
    if (o["g_points"]) op.g_points = scalar<std::size_t>(o["g_points"], "optimize.g_points");
    if (o["tau_points"]) op.tau_points = scalar<std::size_t>(o["tau_points"], "optimize.tau_points");
    if (o["target"]) op.target = scalar<std::string>(o["target"], "optimize.target");
  }
  {
    const auto& op = cfg.optimize;
    if (!(op.g_min > 0.0 && op.g_min <= op.g_max)) problems.push_back("optimize needs 0 < g_min <= g_max");
    if (!(op.tau_min > 0.0 && op.tau_min <= op.tau_max)) problems.push_back("optimize needs 0 < tau_min <= tau_max");
    if (op.g_points < 1 || op.tau_points < 1) problems.push_back("optimize grids need at least one point");
    if (!parse_target(op.target)) problems.push_back("optimize.target must be S_db, E_N, S_pp_db or E_N_pp");
  }

  if (const auto o = root["output"]; o && !o.IsNull()) {
    if (!o.IsMap()) throw ParseError("output", line_of(o), "output must be a mapping");
    check_keys(o, "output", scalar_schema().at("output"), problems);
    if (o["dir"]) cfg.output.dir = scalar<std::string>(o["dir"], "output.dir");
    if (o["stem"]) cfg.output.stem = scalar<std::string>(o["stem"], "output.stem");
    if (o["formats"]) cfg.output.formats = string_list(o["formats"], "output.formats");
    if (o["plot"]) cfg.output.plot = scalar<bool>(o["plot"], "output.plot");
    for (const auto& f : cfg.output.formats)
      if (f != "csv" && f != "json") problems.push_back("output.formats has unknown format '" + f + "'");
  }

  if (!problems.empty()) throw ValidationError(problems);
  return cfg;
}

inline YAML::Node parse_document(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("", e.mark.line + 1, e.msg);
  }
}

/// Reads a config file, applies overrides in order (environment first, then
/// explicit assignments) and validates the result. An empty file gives the defaults.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  YAML::Node root = parse_document(ss.str());
  for (const auto& o : overrides) apply_override(root, o);
  return config_from_yaml(root);
}

inline RunConfig load_config_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
  YAML::Node root = parse_document(text);
  for (const auto& o : overrides) apply_override(root, o);
  return config_from_yaml(root);
}

// ---------------------------------------------------------------- serialization

/// YAML text that loads back to an equal RunConfig.
inline std::string serialize(const RunConfig& cfg) {
  using detail::format_double;
  YAML::Emitter out;
  out << YAML::BeginMap;
  const auto& p = cfg.params;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  auto num = [&](const char* k, double v) { out << YAML::Key << k << YAML::Value << format_double(v); };
  num("kappa", p.kappa);
  num("g", p.g);
  num("omega", p.omega);
  num("gamma", p.gamma);
  num("n_th", p.n_th);
  num("n0", p.n0);
  num("eta_B", p.eta_B);
  num("eta_R", p.eta_R);
  num("tau", p.tau);
  num("tau_D", p.tau_D);
  if (!cfg.tau_R_follows_tau) num("tau_R", p.tau_R);
  out << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "frame" << YAML::Value << to_string(cfg.simulation.frame);
  num("dt", cfg.simulation.dt);
  out << YAML::Key << "log_base" << YAML::Value << to_string(cfg.simulation.log_base);
  out << YAML::Key << "jobs" << YAML::Value << cfg.simulation.jobs;
  out << YAML::EndMap;

  out << YAML::Key << "sweeps" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : cfg.sweeps) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
    out << YAML::Key << "variable" << YAML::Value << s.variable;
    out << YAML::Key << "scale" << YAML::Value << to_string(s.scale);
    out << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(s.lo)
        << format_double(s.hi) << YAML::EndSeq;
    out << YAML::Key << "points" << YAML::Value << s.points;
    out << YAML::Key << "targets" << YAML::Value << YAML::Flow << s.targets;
    if (s.frame) out << YAML::Key << "frame" << YAML::Value << to_string(*s.frame);
    out << YAML::Key << "bipartition" << YAML::Value << to_string(s.bipartition);
    out << YAML::Key << "model" << YAML::Value << to_string(s.model);
    out << YAML::Key << "angle_mode" << YAML::Value << to_string(s.angle_mode);
    if (s.ensemble) {
      out << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "n" << YAML::Value << s.ensemble->n;
      num("rel_width", s.ensemble->rel_width);
      out << YAML::Key << "seed" << YAML::Value << s.ensemble->seed;
      out << YAML::EndMap;
    }
    if (!s.overrides.empty()) {
      out << YAML::Key << "overrides" << YAML::Value << YAML::BeginMap;
      for (const auto& [k, v] : s.overrides) num(k.c_str(), v);
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto& op = cfg.optimize;
  out << YAML::Key << "optimize" << YAML::Value << YAML::BeginMap;
  num("g_min", op.g_min);
  num("g_max", op.g_max);
  out << YAML::Key << "g_points" << YAML::Value << op.g_points;
  num("tau_min", op.tau_min);
  num("tau_max", op.tau_max);
  out << YAML::Key << "tau_points" << YAML::Value << op.tau_points;
  out << YAML::Key << "target" << YAML::Value << op.target;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << cfg.output.dir;
  out << YAML::Key << "stem" << YAML::Value << YAML::DoubleQuoted << cfg.output.stem;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << cfg.output.formats;
  out << YAML::Key << "plot" << YAML::Value << cfg.output.plot;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace pulsecorr::harness
