#pragma once

// The pulsed protocol: a blue-detuned entangling pulse, an optional delay,
// and a red-detuned readout pulse, followed by loss on the detected modes.

#include "pulsecorr/covariance.hpp"
#include "pulsecorr/lyapunov.hpp"
#include "pulsecorr/measures.hpp"
#include "pulsecorr/mode_profile.hpp"
#include "pulsecorr/model.hpp"
#include "pulsecorr/parallel.hpp"
#include "pulsecorr/propagate.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pulsecorr {

struct SimOptions {
  double dt = 0.0;  // integrator step; <= 0 selects default_time_step()
  LogBase log_base = LogBase::Natural;
  /// Coupling during the readout window; unset means the same g as the entangling pulse.
  std::optional<double> readout_coupling;
};

inline double resolve_step(const SystemParams& p, const SimOptions& opts) {
  return opts.dt > 0.0 ? opts.dt : default_time_step(p);
}

inline void require_simulation_frame(Frame frame) {
  if (frame == Frame::Lab) throw InvalidArgument("protocol runs need the RWA or BeyondRWA frame");
}

/// Cavity + mechanics in the co-rotating frame for one pulse type.
inline LyapunovSystem optomechanical_system(const SystemParams& p, PulseKind kind, Frame frame) {
  require_simulation_frame(frame);
  if (frame == Frame::RWA) return LyapunovSystem::constant(build_drift_rwa(p, kind), build_diffusion(p, Frame::RWA));
  return {4, [p, kind](double t) { return build_drift_beyond_rwa(p, kind, t); },
          [p](double t) { return build_diffusion(p, Frame::BeyondRWA, t); }};
}

/// Mechanics is reported in the basis (X_m^(s), -X_m^(c)), a quarter turn of
/// the co-rotating frame, which puts the blue-pulse correlations in the same
/// quadrature convention as the adiabatic two-mode-squeezing map.
inline constexpr double kMechanicsReportAngle = std::numbers::pi / 2.0;

// ---------------------------------------------------------------- adiabatic maps

/// Adiabatic two-mode squeezer B_out = sqrt(G) B_in + sqrt(G-1) a_m^dagger,
/// a_m(tau) = sqrt(G) a_m + sqrt(G-1) B_in^dagger, with vacuum B_in and
/// thermal mechanics (occupation n0). Modes [pulseB, mech].
inline CovarianceMatrix adiabatic_blue(double gain, double n0) {
  if (!(gain >= 1.0)) throw InvalidArgument("adiabatic_blue: gain must be >= 1");
  if (!(n0 >= 0.0)) throw InvalidArgument("adiabatic_blue: n0 must be >= 0");
  const double thermal = 2.0 * n0 + 1.0;
  const double pulse = gain + (gain - 1.0) * thermal;
  const double mech = gain * thermal + gain - 1.0;
  const double corr = 2.0 * std::sqrt(gain * (gain - 1.0)) * (n0 + 1.0);
  Matrix v = Matrix::Zero(4, 4);
  v.diagonal() << pulse, pulse, mech, mech;
  v(0, 2) = v(2, 0) = corr;
  v(1, 3) = v(3, 1) = -corr;
  return {std::move(v), {std::string(modes::kPulseB), std::string(modes::kMechanics)}};
}

/// Adiabatic readout with gain-like factor T >= 1: the mechanics is mapped
/// onto a vacuum readout pulse with efficiency 1 - 1/T,
/// R_out = sqrt(1/T) R_in + sqrt(1 - 1/T) a_m. Input modes [pulseB, mech],
/// output modes [pulseB, pulseR].
inline CovarianceMatrix adiabatic_red(double t_factor, const CovarianceMatrix& pulse_mech) {
  if (!(t_factor >= 1.0)) throw InvalidArgument("adiabatic_red: T must be >= 1");
  const auto in = pulse_mech.select({modes::kPulseB, modes::kMechanics});
  const double keep = 1.0 / t_factor;
  const double transfer = 1.0 - keep;
  Matrix v = in.matrix();
  v.bottomRightCorner<2, 2>() = keep * Eigen::Matrix2d::Identity() + transfer * in.matrix().bottomRightCorner<2, 2>();
  v.topRightCorner<2, 2>() *= std::sqrt(transfer);
  v.bottomLeftCorner<2, 2>() *= std::sqrt(transfer);
  return {std::move(v), {std::string(modes::kPulseB), std::string(modes::kPulseR)}};
}

/// Adiabatic gain exp(2 g^2 tau / kappa) of a pulse of duration `duration`.
inline double adiabatic_gain(const SystemParams& p, double duration) {
  return std::exp(2.0 * p.g * p.g * duration / p.kappa);
}

// ---------------------------------------------------------------- full dynamics

struct BlueOutcome {
  CovarianceMatrix cm;  // [pulseB, mech] after loss
  ModeProfile profile;
  Measures measures;
};

inline Matrix initial_state(const SystemParams& p, Eigen::Index pulses) {
  Matrix v0 = Matrix::Zero(4 + 2 * pulses, 4 + 2 * pulses);
  v0.diagonal().head<4>() << 1.0, 1.0, 2.0 * p.n0 + 1.0, 2.0 * p.n0 + 1.0;
  return v0;
}

inline CovarianceMatrix detected_pulse_mech(const CovarianceMatrix& full, const SystemParams& p) {
  auto pm = full.select({modes::kPulseB, modes::kMechanics});
  pm.rotate_mode(modes::kMechanics, kMechanicsReportAngle);
  return apply_loss(pm, {p.eta_B, p.eta_R});
}

/// Entangling pulse alone: pulse and mechanics at t = tau.
inline BlueOutcome run_blue(const SystemParams& p, Frame frame, const SimOptions& opts = {}) {
  p.validate();
  require_simulation_frame(frame);
  const double dt = resolve_step(p, opts);
  auto profile = temporal_mode(build_drift_rwa(p, PulseKind::Blue), p.tau, dt);
  const auto sys = augment_with_pulse(optomechanical_system(p, PulseKind::Blue, frame), profile, p.kappa);

  LyapunovOptions lo;
  lo.dt = dt;
  const auto traj = solve_lyapunov(sys, initial_state(p, 1), 0.0, p.tau, lo);
  const CovarianceMatrix full(traj.final_state(), {std::string(modes::kCavity), std::string(modes::kMechanics),
                                                   std::string(modes::kPulseB)});
  auto cm = detected_pulse_mech(full, p);
  const auto m = compute_measures(cm.matrix(), opts.log_base);
  return {std::move(cm), std::move(profile), m};
}

struct ProtocolResult {
  CovarianceMatrix cm_pulse_mech;   // [pulseB, mech] at tau
  CovarianceMatrix cm_pulse_pulse;  // [pulseB, pulseR] at tau_f
  Measures measures_pm;
  Measures measures_pp;
  SystemParams params_used;
  Frame frame = Frame::RWA;
  double tau_i = 0.0;  // readout start
  double tau_f = 0.0;  // readout end
  /// Fraction of the mechanical state at tau_i mapped onto the readout pulse,
  /// and the corresponding adiabatic factor T = 1 / (1 - transfer).
  double readout_transfer = 0.0;
  double readout_t_factor = 1.0;
};

/// Mechanics-to-pulse transfer of a readout window, from the noiseless mean dynamics.
inline double readout_transfer(const LyapunovSystem& sys, Eigen::Index mech_index, Eigen::Index pulse_index,
                               double t0, double t1, double dt) {
  LyapunovSystem mean_only{sys.dim, sys.drift, [n = sys.dim](double) { return Matrix::Zero(n, n); }};
  Matrix v0 = Matrix::Zero(sys.dim, sys.dim);
  v0(mech_index, mech_index) = 1.0;
  LyapunovOptions lo;
  lo.dt = dt;
  lo.physical_block = 0;
  const Matrix v = solve_lyapunov(mean_only, v0, t0, t1, lo).final_state();
  return v(pulse_index, pulse_index) + v(pulse_index + 1, pulse_index + 1);
}

/// Entangling pulse, free evolution, readout pulse.
inline ProtocolResult run_full(const SystemParams& p, Frame frame, const SimOptions& opts = {}) {
  p.validate();
  require_simulation_frame(frame);
  const double dt = resolve_step(p, opts);
  const std::vector<std::string> labels = {std::string(modes::kCavity), std::string(modes::kMechanics),
                                           std::string(modes::kPulseB), std::string(modes::kPulseR)};
  LyapunovOptions lo;
  lo.dt = dt;

  ProtocolResult out;
  out.params_used = p;
  out.frame = frame;
  out.tau_i = p.tau + p.tau_D;
  out.tau_f = out.tau_i + p.tau_R;

  // Entangling window [0, tau].
  const auto f_blue = temporal_mode(build_drift_rwa(p, PulseKind::Blue), p.tau, dt);
  const auto blue_sys =
      augment_idle(augment_with_pulse(optomechanical_system(p, PulseKind::Blue, frame), f_blue, p.kappa, 0.0));
  CovarianceMatrix state(solve_lyapunov(blue_sys, initial_state(p, 2), 0.0, p.tau, lo).final_state(), labels);
  out.cm_pulse_mech = detected_pulse_mech(state, p);
  out.measures_pm = compute_measures(out.cm_pulse_mech.matrix(), opts.log_base);

  // Delay [tau, tau_i].
  if (p.tau_D > 0.0) {
    if (frame == Frame::RWA) {
      state = free_segment(state, p.tau_D, p);
    } else {
      const auto free_sys = augment_idle(augment_idle(optomechanical_system(p, PulseKind::Off, frame)));
      state = solve_lyapunov(free_sys, state, p.tau, out.tau_i, lo);
    }
  }

  // Readout window [tau_i, tau_f]; the profile clock restarts at tau_i.
  SystemParams pr = p;
  if (opts.readout_coupling) pr.g = *opts.readout_coupling;
  if (!(pr.g >= 0.0)) throw InvalidArgument("run_full: readout coupling must be >= 0");
  if (p.tau_R > 0.0 && pr.g > 0.0) {
    const auto f_red = temporal_mode(build_drift_rwa(pr, PulseKind::Red), p.tau_R, dt);
    const auto red_sys =
        augment_with_pulse(augment_idle(optomechanical_system(pr, PulseKind::Red, frame)), f_red, p.kappa, out.tau_i);
    state = solve_lyapunov(red_sys, state, out.tau_i, out.tau_f, lo);
    out.readout_transfer = readout_transfer(red_sys, 2, 6, out.tau_i, out.tau_f, dt);
    out.readout_t_factor =
        out.readout_transfer < 1.0 ? 1.0 / (1.0 - out.readout_transfer) : std::numeric_limits<double>::infinity();
  } else {
    // Nothing collected: the readout mode is vacuum.
    const auto k = 2 * state.index_of(modes::kPulseR);
    state.matrix().middleRows(k, 2).setZero();
    state.matrix().middleCols(k, 2).setZero();
    state.matrix().block<2, 2>(k, k).setIdentity();
  }

  out.cm_pulse_pulse = apply_loss(state.select({modes::kPulseB, modes::kPulseR}), {p.eta_B, p.eta_R});
  out.measures_pp = compute_measures(out.cm_pulse_pulse.matrix(), opts.log_base);
  return out;
}

// ---------------------------------------------------------------- targets

enum class Target { SqueezingPM, NegativityPM, SqueezingPP, NegativityPP };

inline std::optional<Target> parse_target(std::string_view name) {
  if (name == "S_db") return Target::SqueezingPM;
  if (name == "E_N") return Target::NegativityPM;
  if (name == "S_pp_db") return Target::SqueezingPP;
  if (name == "E_N_pp") return Target::NegativityPP;
  return std::nullopt;
}

inline std::string_view target_name(Target t) {
  switch (t) {
    case Target::SqueezingPM: return "S_db";
    case Target::NegativityPM: return "E_N";
    case Target::SqueezingPP: return "S_pp_db";
    case Target::NegativityPP: return "E_N_pp";
  }
  return "";
}

inline bool needs_readout(Target t) { return t == Target::SqueezingPP || t == Target::NegativityPP; }

/// Evaluates one target measure, running only the part of the protocol it needs.
inline double evaluate_target(const SystemParams& p, Target target, Frame frame, const SimOptions& opts = {}) {
  if (!needs_readout(target)) {
    const auto m = run_blue(p, frame, opts).measures;
    return target == Target::SqueezingPM ? m.s_db : m.e_n;
  }
  const auto m = run_full(p, frame, opts).measures_pp;
  return target == Target::SqueezingPP ? m.s_db : m.e_n;
}

// ---------------------------------------------------------------- ensembles

struct SampleFailure {
  std::size_t index = 0;
  std::string message;
};

struct EnsembleStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single sample
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;      // samples requested
  std::size_t succeeded = 0;  // samples that produced a value
  std::vector<double> values;
  std::vector<SampleFailure> failures;
};

/// Parameters of ensemble sample `index`: g, tau and log10(n0) each drawn
/// uniformly from [(1 - w) x, (1 + w) x]. The sample generator is
/// mt19937_64 seeded with splitmix64(seed ^ splitmix64(index)); uniforms
/// use the top 53 bits, so draws are identical across platforms.
inline SystemParams perturbed_params(const SystemParams& p, double rel_width, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(index)));
  auto spread = [&](double x) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return x * (1.0 + rel_width * (2.0 * u - 1.0));
  };
  SystemParams q = p;
  const bool readout_tracks_tau = p.tau_R == p.tau;
  q.g = spread(p.g);
  q.tau = spread(p.tau);
  if (readout_tracks_tau) q.tau_R = q.tau;
  if (p.n0 > 0.0) {
    const double log_n0 = std::log10(p.n0);
    q.n0 = p.n0 * std::pow(10.0, spread(log_n0) - log_n0);
  } else {
    static_cast<void>(spread(0.0));
  }
  return q;
}

inline EnsembleStats monte_carlo_ensemble(const SystemParams& p, Target target, std::size_t n, double rel_width,
                                          std::uint64_t seed, Frame frame = Frame::RWA, const SimOptions& opts = {},
                                          std::size_t jobs = 1) {
  if (n < 1) throw InvalidArgument("monte_carlo_ensemble: n must be >= 1");
  if (!(rel_width >= 0.0 && rel_width < 1.0)) throw InvalidArgument("monte_carlo_ensemble: rel_width must be in [0, 1)");

  std::vector<std::optional<double>> slots(n);
  std::vector<std::string> errors(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      slots[i] = evaluate_target(perturbed_params(p, rel_width, seed, i), target, frame, opts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  EnsembleStats st;
  st.count = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) st.values.push_back(*slots[i]);
    else st.failures.push_back({i, errors[i]});
  }
  st.succeeded = st.values.size();
  if (st.values.empty()) return st;
  double sum = 0.0;
  st.min = st.max = st.values.front();
  for (double v : st.values) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / static_cast<double>(st.values.size());
  if (st.min == st.max) st.mean = st.min;  // exact for constant samples
  else if (st.values.size() > 1) {
    double ss = 0.0;
    for (double v : st.values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(st.values.size() - 1));
  }
  return st;
}

// ---------------------------------------------------------------- heating tolerance

struct CriticalHeating {
  double gamma_crit = 0.0;  // reheating rate where the target crosses zero
  bool bracketed = false;   // false: target kept its sign across the search range
};

/// Largest reheating rate at which `target` stays positive, by bisection in log10(Gamma).
inline CriticalHeating critical_reheating(SystemParams p, Target target, Frame frame, const SimOptions& opts = {},
                                          double lo = 1e-4, double hi = 10.0, int iterations = 30) {
  auto value_at = [&](double gamma_rate) {
    p.set_reheating(gamma_rate, p.gamma > 0.0 ? p.gamma : kDefaultGammaFloor);
    return evaluate_target(p, target, frame, opts);
  };
  if (value_at(lo) <= 0.0) return {lo, false};
  if (value_at(hi) > 0.0) return {hi, false};
  double a = std::log10(lo);
  double b = std::log10(hi);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (a + b);
    (value_at(std::pow(10.0, mid)) > 0.0 ? a : b) = mid;
  }
  return {std::pow(10.0, 0.5 * (a + b)), true};
}

struct HeatingOptimum {
  double g = 0.0;
  double tau = 0.0;
  double gamma_crit = 0.0;
};

/// Grid search over (g, tau) for the largest critical reheating rate. The
/// readout duration follows tau.
inline HeatingOptimum optimize_heating_tolerance(const SystemParams& p, const std::vector<double>& g_grid,
                                                 const std::vector<double>& tau_grid, Target target, Frame frame,
                                                 const SimOptions& opts = {}, std::size_t jobs = 1) {
  struct Cell {
    double g, tau, crit;
  };
  std::vector<Cell> cells;
  for (double g : g_grid)
    for (double t : tau_grid) cells.push_back({g, t, -1.0});
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    SystemParams q = p;
    q.g = cells[i].g;
    q.tau = cells[i].tau;
    q.tau_R = cells[i].tau;
    try {
      cells[i].crit = critical_reheating(q, target, frame, opts).gamma_crit;
    } catch (const Error&) {
      cells[i].crit = -1.0;
    }
  });
  HeatingOptimum best{0.0, 0.0, -1.0};
  for (const auto& c : cells)
    if (c.crit > best.gamma_crit) best = {c.g, c.tau, c.crit};
  return best;
}

}  // namespace pulsecorr
