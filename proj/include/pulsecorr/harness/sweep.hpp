#pragma once

// Sweep execution: one table row per sweep point, rows in sweep order.

#include "pulsecorr/harness/config.hpp"
#include "pulsecorr/parallel.hpp"
#include "pulsecorr/protocol.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pulsecorr::harness {

struct SweepRow {
  double value = 0.0;
  Measures measures;
  std::optional<double> mean_s_db;
  std::optional<double> std_s_db;
  std::string error;  // empty on success
  [[nodiscard]] bool ok() const { return error.empty(); }
};

struct SweepTable {
  std::string name;
  std::string variable;
  Scale scale = Scale::Linear;
  bool ensemble = false;  // rows carry mean/std columns
  std::vector<std::string> targets;
  std::vector<SweepRow> rows;

  [[nodiscard]] bool has_errors() const {
    for (const auto& r : rows)
      if (!r.ok()) return true;
    return false;
  }
};

/// Grid of the swept variable; the endpoints are exactly lo and hi.
inline std::vector<double> sweep_values(const SweepSpec& s) {
  std::vector<double> out(s.points);
  if (s.points == 0) return out;
  if (s.points == 1) {
    out[0] = s.lo;
    return out;
  }
  const double n = static_cast<double>(s.points - 1);
  for (std::size_t k = 0; k < s.points; ++k) {
    const double u = static_cast<double>(k) / n;
    out[k] = s.scale == Scale::Linear ? s.lo + (s.hi - s.lo) * u
                                      : std::pow(10.0, std::log10(s.lo) + (std::log10(s.hi) - std::log10(s.lo)) * u);
  }
  out.front() = s.lo;
  out.back() = s.hi;
  return out;
}

inline SimOptions simulation_options(const RunConfig& cfg) {
  SimOptions o;
  o.dt = cfg.simulation.dt;
  o.log_base = cfg.simulation.log_base;
  return o;
}

/// Base parameters of a sweep: the config values with the sweep's overrides applied.
inline SystemParams sweep_base_params(const RunConfig& cfg, const SweepSpec& s, bool& tau_R_follows_tau) {
  SystemParams p = cfg.params;
  tau_R_follows_tau = cfg.tau_R_follows_tau && !s.overrides.contains("tau_R");
  for (const auto& [k, v] : s.overrides) set_parameter(p, tau_R_follows_tau, k, v);
  return p;
}

/// Pulse-mechanics (or pulse-pulse) state from the adiabatic maps after loss.
/// Reheating and delay are not part of the adiabatic description.
inline CovarianceMatrix adiabatic_state(const SystemParams& p, Bipartition b) {
  const auto pm = adiabatic_blue(adiabatic_gain(p, p.tau), p.n0);
  if (b == Bipartition::PulseMech) return apply_loss(pm, {p.eta_B, p.eta_R});
  return apply_loss(adiabatic_red(adiabatic_gain(p, p.tau_R), pm), {p.eta_B, p.eta_R});
}

/// Detected state of the requested bipartition.
inline CovarianceMatrix detected_state(const SystemParams& p, Bipartition b, Model model, Frame frame,
                                       const SimOptions& opts) {
  if (model == Model::Adiabatic) {
    p.validate();
    return adiabatic_state(p, b);
  }
  if (b == Bipartition::PulseMech) return run_blue(p, frame, opts).cm;
  return run_full(p, frame, opts).cm_pulse_pulse;
}

namespace detail {

inline std::string ensemble_error(const EnsembleStats& st) {
  if (st.failures.empty()) return "";
  return std::to_string(st.failures.size()) + " of " + std::to_string(st.count) +
         " ensemble samples failed (sample " + std::to_string(st.failures.front().index) +
         ": " + st.failures.front().message + ")";
}

inline SweepRow failed_row(double value, const std::string& message) {
  SweepRow r;
  r.value = value;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.measures = {nan, nan, nan, nan};
  r.error = message.empty() ? "unknown error" : message;
  return r;
}

}  // namespace detail

/// Runs one sweep on up to `jobs` threads (0: logical cores). Errors at a
/// point are recorded in that row and the sweep continues.
inline SweepTable run_sweep(const RunConfig& cfg, const SweepSpec& spec, std::size_t jobs = 1) {
  SweepTable table;
  table.name = spec.name;
  table.variable = spec.variable;
  table.scale = spec.scale;
  table.ensemble = spec.ensemble.has_value();
  table.targets = spec.targets;

  const auto values = sweep_values(spec);
  const Frame frame = spec.frame.value_or(cfg.simulation.frame);
  const SimOptions opts = simulation_options(cfg);
  bool follows = true;
  const SystemParams base = sweep_base_params(cfg, spec, follows);
  table.rows.resize(values.size());

  if (spec.variable == "theta_B") {
    // One simulation, then a scan of the local-oscillator angle on pulse B.
    try {
      const auto state = detected_state(base, spec.bipartition, spec.model, frame, opts);
      const Matrix& v = state.matrix();
      const auto m = compute_measures(v, opts.log_base);
      const auto opt = optimize_angles(v);
      for (std::size_t k = 0; k < values.size(); ++k) {
        SweepRow r;
        r.value = values[k];
        r.measures = m;
        r.measures.s_db = -10.0 * std::log10(scanned_variance(v, values[k], spec.angle_mode, opt.angles));
        table.rows[k] = r;
      }
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < values.size(); ++k) table.rows[k] = detail::failed_row(values[k], e.what());
    }
    return table;
  }

  parallel_for(values.size(), jobs, [&](std::size_t k) {
    try {
      SystemParams p = base;
      set_parameter(p, follows, spec.variable, values[k]);
      SweepRow r;
      r.value = values[k];
      r.measures = compute_measures(detected_state(p, spec.bipartition, spec.model, frame, opts).matrix(), opts.log_base);
      if (spec.ensemble) {
        const Target t = spec.bipartition == Bipartition::PulseMech ? Target::SqueezingPM : Target::SqueezingPP;
        const auto st = monte_carlo_ensemble(p, t, spec.ensemble->n, spec.ensemble->rel_width, spec.ensemble->seed,
                                             frame, opts, 1);
        if (st.succeeded > 0) {
          r.mean_s_db = st.mean;
          r.std_s_db = st.std;
        }
        r.error = detail::ensemble_error(st);
      }
      table.rows[k] = std::move(r);
    } catch (const std::exception& e) {
      table.rows[k] = detail::failed_row(values[k], e.what());
    }
  });
  return table;
}

inline std::vector<SweepTable> run_sweeps(const RunConfig& cfg, std::size_t jobs = 1) {
  std::vector<SweepTable> out;
  out.reserve(cfg.sweeps.size());
  for (const auto& s : cfg.sweeps) out.push_back(run_sweep(cfg, s, jobs));
  return out;
}

}  // namespace pulsecorr::harness
