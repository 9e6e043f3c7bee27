#pragma once

// Leaking-pulse bookkeeping on top of the Lyapunov integrator.
//
// A detected pulse mode U = int f(t) u_out(t) dt, with the input-output
// relation u_out = sqrt(2 kappa) u_cav - u_in, obeys
//   dU/dt = f(t) (sqrt(2 kappa) u_cav - u_in),
// so it adds two rows to the drift and a rank-one noise block
//   [[2 kappa, -f sqrt(2 kappa)], [-f sqrt(2 kappa), f^2]]
// per quadrature. The cavity must occupy the first two coordinates.

#include "pulsecorr/covariance.hpp"
#include "pulsecorr/lyapunov.hpp"
#include "pulsecorr/mode_profile.hpp"
#include "pulsecorr/model.hpp"

#include <cmath>
#include <memory>

namespace pulsecorr {

/// Appends a pulse mode collected with profile `f` during
/// [window_start, window_start + f.duration()]; outside the window the mode is frozen.
inline LyapunovSystem augment_with_pulse(const LyapunovSystem& sys, const ModeProfile& f, double kappa,
                                         double window_start = 0.0) {
  if (sys.dim < 4) throw DimensionMismatch("augment_with_pulse: system must contain cavity and mechanics");
  const Eigen::Index n = sys.dim;
  const double coupling = std::sqrt(2.0 * kappa);
  auto profile = std::make_shared<const ModeProfile>(f);

  auto drift = [inner = sys.drift, profile, n, coupling, window_start](double t) {
    const Matrix a_in = inner(t);
    if (a_in.rows() != n) throw DimensionMismatch("augment_with_pulse: drift supplier changed dimension");
    Matrix a = Matrix::Zero(n + 2, n + 2);
    a.topLeftCorner(n, n) = a_in;
    const double ft = (*profile)(t - window_start);
    a(n, 0) = coupling * ft;
    a(n + 1, 1) = coupling * ft;
    return a;
  };
  auto diffusion = [inner = sys.diffusion, profile, n, coupling, window_start](double t) {
    const Matrix d_in = inner(t);
    if (d_in.rows() != n) throw DimensionMismatch("augment_with_pulse: diffusion supplier changed dimension");
    Matrix d = Matrix::Zero(n + 2, n + 2);
    d.topLeftCorner(n, n) = d_in;
    const double ft = (*profile)(t - window_start);
    for (Eigen::Index q = 0; q < 2; ++q) {
      d(q, n + q) = -ft * coupling;
      d(n + q, q) = -ft * coupling;
      d(n + q, n + q) = ft * ft;
    }
    return d;
  };
  return {n + 2, std::move(drift), std::move(diffusion)};
}

/// Appends a pulse mode that is not being collected (f = 0).
inline LyapunovSystem augment_idle(const LyapunovSystem& sys) {
  const Eigen::Index n = sys.dim;
  auto pad = [n](const MatrixSupplier& inner) {
    return [inner, n](double t) {
      Matrix m = Matrix::Zero(n + 2, n + 2);
      m.topLeftCorner(n, n) = inner(t);
      return m;
    };
  };
  return {n + 2, pad(sys.drift), pad(sys.diffusion)};
}

/// Closed-form evolution without optomechanical coupling over `tau_d`:
/// cavity relaxes to vacuum at 2 kappa, mechanics thermalizes at gamma,
/// completed pulse modes are untouched.
inline CovarianceMatrix free_segment(const CovarianceMatrix& v, double tau_d, const SystemParams& p) {
  if (tau_d < 0.0) throw InvalidArgument("free_segment: tau_D must be >= 0");
  if (!v.has_mode(modes::kMechanics)) throw InvalidArgument("free_segment: state has no mechanical mode");
  const auto n = static_cast<Eigen::Index>(v.mode_count());
  Vector rate(n);    // amplitude decay rate per mode
  Vector source(n);  // diffusion per quadrature
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& label = v.labels()[static_cast<std::size_t>(k)];
    if (label == modes::kCavity) {
      rate(k) = p.kappa;
      source(k) = 2.0 * p.kappa;
    } else if (label == modes::kMechanics) {
      rate(k) = 0.5 * p.gamma;
      source(k) = p.gamma * (2.0 * p.n_th + 1.0);
    } else {
      rate(k) = 0.0;
      source(k) = 0.0;
    }
  }
  Matrix out = v.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = rate(i) + rate(j);
      out.block<2, 2>(2 * i, 2 * j) *= std::exp(-r * tau_d);
      if (i == j && source(i) > 0.0) {
        // source * (1 - e^{-r tau}) / r, continuous as r -> 0
        const double gain = r > 0.0 ? -std::expm1(-r * tau_d) / r : tau_d;
        out.block<2, 2>(2 * i, 2 * i) += source(i) * gain * Eigen::Matrix2d::Identity();
      }
    }
  }
  return {std::move(out), v.labels()};
}

}  // namespace pulsecorr
