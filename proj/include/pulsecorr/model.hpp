#pragma once

// Linearized cavity optomechanics: parameters, drift and diffusion matrices.
//
// Quadratures are normalized so that [X, P] = 2i and the vacuum variance is 1.
// The state vector is ordered (X_c, P_c, X_m, P_m) in the lab frame and
// (X_c^(c), X_c^(s), X_m^(c), X_m^(s)) in the frame co-rotating with the
// free cavity and mechanical evolution. All rates are in units of kappa.

#include "pulsecorr/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pulsecorr {

/// Damping rate used when only the reheating rate Gamma = gamma * n_th is given.
inline constexpr double kDefaultGammaFloor = 1e-6;

struct SystemParams {
  double kappa = 1.0;   // cavity amplitude decay rate
  double g = 0.6;       // optomechanical coupling
  double omega = 2.0;   // mechanical frequency
  double gamma = kDefaultGammaFloor;
  double n_th = 0.06 / kDefaultGammaFloor;
  double n0 = 1e4;      // initial mechanical occupation
  double eta_B = 0.8;   // transmittance on the entangling-pulse path
  double eta_R = 0.8;   // transmittance on the readout path
  double tau = 8.0;     // entangling pulse duration
  double tau_D = 0.0;   // delay between the pulses
  double tau_R = 8.0;   // readout pulse duration

  /// Reheating rate Gamma = gamma * n_th.
  [[nodiscard]] double reheating() const { return gamma * n_th; }

  /// Sets Gamma by fixing gamma = gamma_floor and n_th = Gamma / gamma.
  void set_reheating(double reheating_rate, double gamma_floor = kDefaultGammaFloor) {
    gamma = gamma_floor;
    n_th = gamma > 0.0 ? reheating_rate / gamma : 0.0;
  }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto non_negative = [&](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be a finite value >= 0");
    };
    if (!(kappa > 0.0) || !std::isfinite(kappa)) out.emplace_back("kappa must be > 0");
    non_negative(g, "g");
    non_negative(omega, "omega");
    non_negative(gamma, "gamma");
    non_negative(n_th, "n_th");
    non_negative(n0, "n0");
    non_negative(tau, "tau");
    non_negative(tau_D, "tau_D");
    non_negative(tau_R, "tau_R");
    auto unit = [&](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) out.push_back(std::string(name) + " must lie in [0, 1]");
    };
    unit(eta_B, "eta_B");
    unit(eta_R, "eta_R");
    return out;
  }

  void validate() const {
    auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid SystemParams:";
    for (const auto& s : v) msg += " " + s + ";";
    throw InvalidArgument(msg);
  }

  bool operator==(const SystemParams&) const = default;
};

/// Pulse type. Blue drives the upper sideband (Delta = -Omega, two-mode
/// squeezing), Red the lower sideband (Delta = +Omega, beam splitter).
enum class PulseKind { Blue, Red, Off };

enum class Frame { Lab, RWA, BeyondRWA };

/// Pump detuning Delta = omega_cav - omega_pump.
class Detuning {
 public:
  static Detuning blue() { return Detuning(Kind::Blue, 0.0); }
  static Detuning red() { return Detuning(Kind::Red, 0.0); }
  static Detuning custom(double delta) { return Detuning(Kind::Custom, delta); }
  static Detuning for_pulse(PulseKind kind) {
    switch (kind) {
      case PulseKind::Blue: return blue();
      case PulseKind::Red: return red();
      case PulseKind::Off: break;
    }
    return custom(0.0);
  }

  [[nodiscard]] double value(const SystemParams& p) const {
    switch (kind_) {
      case Kind::Blue: return -p.omega;
      case Kind::Red: return p.omega;
      case Kind::Custom: break;
    }
    return delta_;
  }

 private:
  enum class Kind { Blue, Red, Custom };
  Detuning(Kind k, double d) : kind_(k), delta_(d) {}
  Kind kind_;
  double delta_;
};

/// Effective sideband couplings (g_b, g_r) for a pulse.
struct SidebandCouplings {
  double blue = 0.0;
  double red = 0.0;
};

inline SidebandCouplings sideband_couplings(const SystemParams& p, PulseKind kind) {
  switch (kind) {
    case PulseKind::Blue: return {p.g, 0.0};
    case PulseKind::Red: return {0.0, p.g};
    case PulseKind::Off: break;
  }
  return {};
}

inline double pump_coupling(const SystemParams& p, PulseKind kind) {
  return kind == PulseKind::Off ? 0.0 : p.g;
}

/// Lab-frame drift of the Langevin equations for H = Delta(Xc^2+Pc^2)/4 +
/// Omega(Xm^2+Pm^2)/4 - g Xc Xm, with cavity decay kappa and viscous damping
/// gamma acting on P_m.
inline Matrix build_drift_lab(const SystemParams& p, Detuning detuning, double coupling) {
  const double delta = detuning.value(p);
  Matrix a = Matrix::Zero(4, 4);
  a(0, 0) = -p.kappa;
  a(0, 1) = delta;
  a(1, 0) = -delta;
  a(1, 1) = -p.kappa;
  a(1, 2) = 2.0 * coupling;
  a(2, 3) = p.omega;
  a(3, 0) = 2.0 * coupling;
  a(3, 2) = -p.omega;
  a(3, 3) = -p.gamma;
  return a;
}

inline Matrix build_drift_lab(const SystemParams& p, Detuning detuning) {
  return build_drift_lab(p, detuning, p.g);
}

/// Drift in the co-rotating frame after dropping terms oscillating at 2*Omega.
inline Matrix build_drift_rwa(const SystemParams& p, PulseKind kind) {
  const auto [gb, gr] = sideband_couplings(p, kind);
  Matrix a = Matrix::Zero(4, 4);
  a.diagonal() << -p.kappa, -p.kappa, -p.gamma / 2.0, -p.gamma / 2.0;
  a(0, 3) = gb - gr;
  a(2, 1) = gb - gr;
  a(1, 2) = gb + gr;
  a(3, 0) = gb + gr;
  return a;
}

namespace detail {

inline Eigen::Matrix2d rot2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

inline Eigen::Matrix2d rot2_rate(double angle, double rate) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << -s, c, -c, -s;
  return rate * r;
}

}  // namespace detail

/// R(t) = R2(Delta t) (+) R2(Omega t), mapping co-rotating amplitudes to lab quadratures.
inline Matrix rotation_matrix(double delta, double omega, double t) {
  Matrix r = Matrix::Zero(4, 4);
  r.topLeftCorner<2, 2>() = detail::rot2(delta * t);
  r.bottomRightCorner<2, 2>() = detail::rot2(omega * t);
  return r;
}

inline Matrix rotation_matrix_rate(double delta, double omega, double t) {
  Matrix r = Matrix::Zero(4, 4);
  r.topLeftCorner<2, 2>() = detail::rot2_rate(delta * t, delta);
  r.bottomRightCorner<2, 2>() = detail::rot2_rate(omega * t, omega);
  return r;
}

/// Time-dependent co-rotating drift R^-1 (A_lab R - dR/dt) keeping all
/// counter-rotating terms.
inline Matrix build_drift_beyond_rwa(const SystemParams& p, PulseKind kind, double t) {
  const double delta = Detuning::for_pulse(kind).value(p);
  const Matrix a = build_drift_lab(p, Detuning::custom(delta), pump_coupling(p, kind));
  const Matrix r = rotation_matrix(delta, p.omega, t);
  const Matrix rdot = rotation_matrix_rate(delta, p.omega, t);
  return r.transpose() * (a * r - rdot);
}

/// Noise correlation matrix in the requested frame. `t` is only used for BeyondRWA.
inline Matrix build_diffusion(const SystemParams& p, Frame frame, double t = 0.0) {
  const double thermal = p.gamma * (2.0 * p.n_th + 1.0);
  Matrix d = Matrix::Zero(4, 4);
  d(0, 0) = 2.0 * p.kappa;
  d(1, 1) = 2.0 * p.kappa;
  switch (frame) {
    case Frame::Lab:
      d(3, 3) = 2.0 * thermal;
      break;
    case Frame::RWA:
      d(2, 2) = thermal;
      d(3, 3) = thermal;
      break;
    case Frame::BeyondRWA: {
      // Lab noise (0, sqrt(2 gamma) xi_th) seen from the co-rotating frame.
      // R2^T diag(0, 2 thermal) R2, written out so the block is exactly symmetric.
      const double c = std::cos(p.omega * t);
      const double s = std::sin(p.omega * t);
      d(2, 2) = 2.0 * thermal * s * s;
      d(2, 3) = d(3, 2) = -2.0 * thermal * s * c;
      d(3, 3) = 2.0 * thermal * c * c;
      break;
    }
  }
  return d;
}

/// Default integrator step resolving both kappa and the 2*Omega oscillations.
inline double default_time_step(const SystemParams& p) {
  double dt = 0.01 / p.kappa;
  if (p.omega > 0.0) dt = std::min(dt, 0.05 / p.omega);
  return dt;
}

}  // namespace pulsecorr
