#pragma once

#include "pulsecorr/expm.hpp"
#include "pulsecorr/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace pulsecorr {

/// Temporal profile f_out(t) sampled on a uniform grid starting at t = 0.
///
/// The grid step is half of the integrator step, so the three RK4 stage
/// times of every step fall on samples. The norm is the composite Simpson
/// sum over the samples, which is exactly what RK4 accumulates for f^2.
class ModeProfile {
 public:
  ModeProfile() = default;

  /// Normalizes `raw` to unit square integral. `raw.size()` must be odd (>= 3).
  ModeProfile(std::vector<double> raw, double grid_step) : step_(grid_step), samples_(std::move(raw)) {
    if (samples_.size() < 3 || samples_.size() % 2 == 0)
      throw InvalidArgument("ModeProfile: need an odd number (>= 3) of samples");
    if (!(step_ > 0.0)) throw InvalidArgument("ModeProfile: grid step must be > 0");
    const double n2 = simpson_sq(samples_, step_);
    if (!(n2 > 0.0)) throw DegenerateProfile("ModeProfile: profile is identically zero");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& s : samples_) s *= scale;
  }

  [[nodiscard]] double grid_step() const { return step_; }
  [[nodiscard]] double duration() const { return step_ * static_cast<double>(samples_.size() - 1); }
  [[nodiscard]] const std::vector<double>& samples() const { return samples_; }

  /// Linear interpolation; zero outside [0, duration].
  [[nodiscard]] double operator()(double t) const {
    if (samples_.empty() || t < -1e-12 * step_ || t > duration() * (1.0 + 1e-12) + 1e-12) return 0.0;
    const double x = std::max(0.0, t) / step_;
    auto i = static_cast<std::size_t>(x);
    if (i >= samples_.size() - 1) return samples_.back();
    const double frac = x - static_cast<double>(i);
    // Snap to the sample when the stage time is a grid point up to rounding.
    if (frac < 1e-9) return samples_[i];
    if (frac > 1.0 - 1e-9) return samples_[i + 1];
    return (1.0 - frac) * samples_[i] + frac * samples_[i + 1];
  }

  [[nodiscard]] double norm_squared() const { return simpson_sq(samples_, step_); }

 private:
  static double simpson_sq(const std::vector<double>& f, double h) {
    double acc = f.front() * f.front() + f.back() * f.back();
    for (std::size_t k = 1; k + 1 < f.size(); ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * f[k] * f[k];
    return acc * h / 3.0;
  }

  double step_ = 0.0;
  std::vector<double> samples_;
};

struct MatrixElement {
  Eigen::Index row = 0;
  Eigen::Index col = 3;
};

/// Mechanics-to-light transfer element used for both pulses: initial
/// X_m^(s) onto the cavity X_c^(c), i.e. M_14 in 1-based indexing.
inline constexpr MatrixElement kTransferElement{0, 3};

/// f(t) proportional to [exp(A t)]_element on [0, tau], sampled for an
/// integrator step `dt`. The profile is normalized with a positive factor.
inline ModeProfile temporal_mode(const Matrix& drift, double tau, double dt,
                                 MatrixElement element = kTransferElement) {
  if (!(tau > 0.0)) throw InvalidArgument("temporal_mode: tau must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("temporal_mode: dt must be > 0");
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(tau / dt - 1e-9)));
  const std::size_t count = 2 * steps + 1;
  const double h = tau / static_cast<double>(2 * steps);

  const Matrix step = matrix_exponential(drift, h);
  Matrix m = Matrix::Identity(drift.rows(), drift.cols());
  std::vector<double> raw(count);
  double peak = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    raw[k] = m(element.row, element.col);
    peak = std::max(peak, std::abs(raw[k]));
    m = m * step;
  }
  if (peak < 1e-12) throw DegenerateProfile("temporal_mode: no mechanics-to-light transfer in the selected element");
  return {std::move(raw), h};
}

}  // namespace pulsecorr
