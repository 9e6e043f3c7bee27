// pulsecorr: command-line front end for the pulsed optomechanics simulator.
//
//   pulsecorr point    [options]   single protocol run, prints the measures
//   pulsecorr sweep    [options]   runs every sweep in the config
//   pulsecorr angles   [options]   theta_B scan of the detected state
//   pulsecorr optimize [options]   (g, tau) grid search for the largest tolerable Gamma
//   pulsecorr recipes              lists the shipped figure configs
//
// Exit status: 0 on success, 2 if any point errored, 1 on a config failure.

#include "pulsecorr/harness/config.hpp"
#include "pulsecorr/harness/output.hpp"
#include "pulsecorr/harness/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

extern char** environ;

namespace {

using namespace pulsecorr;
using namespace pulsecorr::harness;
namespace fs = std::filesystem;
namespace hd = pulsecorr::harness::detail;

#ifndef PULSECORR_RECIPE_DIR
#define PULSECORR_RECIPE_DIR "recipes"
#endif

struct CommonOptions {
  std::string config;
  std::string recipe;
  std::string recipe_dir = PULSECORR_RECIPE_DIR;
  std::vector<std::string> sets;
  std::size_t jobs = 0;
  std::string out;
  std::string format;
  bool plot = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "YAML config file");
  cmd->add_option("-r,--recipe", o.recipe, "shipped recipe name (e.g. fig2a)");
  cmd->add_option("--recipe-dir", o.recipe_dir, "directory holding the recipes");
  cmd->add_option("-s,--set", o.sets, "override a key, e.g. --set params.g=0.5 (repeatable)");
  cmd->add_option("-j,--jobs", o.jobs, "worker threads (0: logical cores)");
  cmd->add_option("-o,--out", o.out, "output directory (output.dir)");
  cmd->add_option("-f,--format", o.format, "output format: csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_flag("--plot", o.plot, "also write an SVG plot per sweep");
}

std::vector<std::string> environment() {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
  return env;
}

RunConfig resolve_config(CommonOptions& o, const CLI::App* cmd) {
  std::vector<std::string> overrides = environment_overrides(environment());
  overrides.insert(overrides.end(), o.sets.begin(), o.sets.end());
  if (!o.out.empty()) overrides.push_back("output.dir=\"" + o.out + "\"");
  if (o.format == "both") overrides.push_back("output.formats=[csv, json]");
  else if (!o.format.empty()) overrides.push_back("output.formats=[" + o.format + "]");
  if (o.plot) overrides.push_back("output.plot=true");
  if (cmd->count("--jobs") > 0) overrides.push_back("simulation.jobs=" + std::to_string(o.jobs));

  if (!o.config.empty() && !o.recipe.empty()) throw ParseError("", 0, "use either --config or --recipe, not both");
  std::string path = o.config;
  if (!o.recipe.empty()) path = (fs::path(o.recipe_dir) / (o.recipe + ".yaml")).string();
  if (path.empty()) return load_config_text("", overrides);
  return load_config(path, overrides);
}

void print_measures(std::ostream& out, const char* label, const Measures& m) {
  out << label << ": S_db=" << hd::format_double(m.s_db) << " E_N=" << hd::format_double(m.e_n)
      << " nu_minus=" << hd::format_double(m.nu_minus) << " lambda_min=" << hd::format_double(m.lambda_min)
      << '\n';
}

nlohmann::ordered_json measures_json(const Measures& m) {
  return {{"S_db", m.s_db}, {"E_N", m.e_n}, {"nu_minus", m.nu_minus}, {"lambda_min", m.lambda_min}};
}

int cmd_point(const RunConfig& cfg, const std::string& format) {
  const auto r = run_full(cfg.params, cfg.simulation.frame, simulation_options(cfg));
  if (format == "json") {
    nlohmann::ordered_json j;
    j["frame"] = to_string(r.frame);
    j["pulse_mech"] = measures_json(r.measures_pm);
    j["pulse_pulse"] = measures_json(r.measures_pp);
    j["readout_T"] = std::isfinite(r.readout_t_factor) ? nlohmann::ordered_json(r.readout_t_factor) : nullptr;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "frame: " << to_string(r.frame) << '\n';
    print_measures(std::cout, "pulse_mech", r.measures_pm);
    print_measures(std::cout, "pulse_pulse", r.measures_pp);
    std::cout << "readout_T: " << hd::format_double(r.readout_t_factor) << '\n';
  }
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& only) {
  std::vector<SweepTable> tables;
  for (const auto& s : cfg.sweeps) {
    if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
    tables.push_back(run_sweep(cfg, s, cfg.simulation.jobs));
  }
  if (tables.empty()) {
    std::cerr << "pulsecorr: no sweeps to run\n";
    return 1;
  }
  for (const auto& path : write_outputs(tables, cfg.output)) std::cout << path.string() << '\n';
  int status = 0;
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (r.ok()) continue;
      std::cerr << t.name << ": " << t.variable << "=" << hd::format_double(r.value) << ": " << r.error << '\n';
      status = 2;
    }
  }
  return status;
}

int cmd_angles(const RunConfig& cfg, const std::string& bipartition, const std::string& mode, std::size_t points) {
  SweepSpec spec;
  spec.name = "angles";
  spec.variable = "theta_B";
  spec.scale = Scale::Linear;
  spec.lo = 0.0;
  spec.hi = std::numbers::pi;
  spec.points = points;
  spec.targets = {"S_db"};
  spec.bipartition = bipartition == "pulse_mech" ? Bipartition::PulseMech : Bipartition::PulsePulse;
  spec.angle_mode = *hd::parse_enum<AngleScanMode>(
      mode, {AngleScanMode::Hold, AngleScanMode::ReoptimizePhi, AngleScanMode::ReoptimizeAll});
  const auto table = run_sweep(cfg, spec, 1);
  if (table.has_errors()) {
    std::cerr << "pulsecorr: " << table.rows.front().error << '\n';
    return 2;
  }
  const auto state = detected_state(cfg.params, spec.bipartition, Model::Full, cfg.simulation.frame,
                                    simulation_options(cfg));
  const double width = squeezing_window_width(state.matrix(), spec.angle_mode);
  double peak = -1e300;
  for (const auto& r : table.rows) peak = std::max(peak, r.measures.s_db);

  std::vector<SweepTable> tables = {table};
  for (const auto& path : write_outputs(tables, cfg.output)) std::cout << path.string() << '\n';
  std::cout << "peak_S_db: " << hd::format_double(peak) << '\n';
  std::cout << "optimal_S_db: " << hd::format_double(-10.0 * std::log10(smallest_eigenvalue(state.matrix())))
            << '\n';
  std::cout << "window_width_rad: " << hd::format_double(width) << '\n';
  return 0;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

int cmd_optimize(const RunConfig& cfg) {
  const auto& o = cfg.optimize;
  const Target target = *parse_target(o.target);
  const auto best = optimize_heating_tolerance(cfg.params, grid(o.g_min, o.g_max, o.g_points),
                                               grid(o.tau_min, o.tau_max, o.tau_points), target,
                                               cfg.simulation.frame, simulation_options(cfg), cfg.simulation.jobs);
  if (best.gamma_crit < 0.0) {
    std::cerr << "pulsecorr: every grid point failed\n";
    return 2;
  }
  std::cout << "target: " << o.target << '\n'
            << "g: " << hd::format_double(best.g) << '\n'
            << "tau: " << hd::format_double(best.tau) << '\n'
            << "Gamma_crit: " << hd::format_double(best.gamma_crit) << '\n';
  return 0;
}

int cmd_recipes(const std::string& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.path().extension() == ".yaml") files.push_back(e.path());
  if (ec) {
    std::cerr << "pulsecorr: cannot list '" << dir << "': " << ec.message() << '\n';
    return 1;
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    // The first comment line of a recipe is its description.
    std::ifstream in(f);
    std::string line, summary;
    while (std::getline(in, line))
      if (line.rfind("#", 0) == 0) {
        summary = line.substr(line.find_first_not_of("# "));
        break;
      }
    std::cout << f.stem().string() << "\t" << summary << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian covariance simulator for pulsed levitated optomechanics"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string point_format = "text";
  std::vector<std::string> only;
  std::string bipartition = "pulse_pulse", mode = "reoptimize_phi";
  std::size_t angle_points = 181;

  auto* point = app.add_subcommand("point", "single protocol run");
  add_common(point, common);
  point->add_option("--print", point_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* sweep = app.add_subcommand("sweep", "run the configured sweeps");
  add_common(sweep, common);
  sweep->add_option("--only", only, "run only the named sweeps");

  auto* angles = app.add_subcommand("angles", "theta_B scan of the detected state");
  add_common(angles, common);
  angles->add_option("--bipartition", bipartition)->check(CLI::IsMember({"pulse_mech", "pulse_pulse"}));
  angles->add_option("--mode", mode)->check(CLI::IsMember({"hold", "reoptimize_phi", "reoptimize_all"}));
  angles->add_option("--points", angle_points)->check(CLI::Range(2, 100000));

  auto* optimize = app.add_subcommand("optimize", "grid search for the largest tolerable reheating rate");
  add_common(optimize, common);

  auto* recipes = app.add_subcommand("recipes", "list the shipped figure recipes");
  recipes->add_option("--recipe-dir", common.recipe_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (recipes->parsed()) return cmd_recipes(common.recipe_dir);

  CLI::App* active = app.get_subcommands().front();
  RunConfig cfg;
  try {
    cfg = resolve_config(common, active);
  } catch (const Error& e) {
    std::cerr << "pulsecorr: " << e.what() << '\n';
    return 1;
  }

  try {
    if (point->parsed()) return cmd_point(cfg, point_format);
    if (sweep->parsed()) return cmd_sweep(cfg, only);
    if (angles->parsed()) return cmd_angles(cfg, bipartition, mode, angle_points);
    if (optimize->parsed()) return cmd_optimize(cfg);
  } catch (const OutputError& e) {
    std::cerr << "pulsecorr: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pulsecorr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
