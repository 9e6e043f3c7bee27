#pragma once

// Fixed-step RK4 integration of dV/dt = A(t) V + V A(t)^T + D(t).

#include "pulsecorr/covariance.hpp"
#include "pulsecorr/measures.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <vector>

namespace pulsecorr {

using MatrixSupplier = std::function<Matrix(double)>;

struct LyapunovSystem {
  Eigen::Index dim = 0;
  MatrixSupplier drift;
  MatrixSupplier diffusion;

  /// Time-independent system.
  static LyapunovSystem constant(Matrix a, Matrix d) {
    const auto n = a.rows();
    return {n, [a = std::move(a)](double) { return a; }, [d = std::move(d)](double) { return d; }};
  }
};

struct LyapunovOptions {
  double dt = 0.01;
  /// Store every `record_stride`-th state; 0 keeps only the final state.
  std::size_t record_stride = 0;
  /// Leading block checked for physicality after every step (0 disables).
  Eigen::Index physical_block = 4;
  double physical_tol = 1e-6;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;

  [[nodiscard]] const Matrix& final_state() const { return states.back(); }
};

inline Matrix lyapunov_rhs(const Matrix& a, const Matrix& v, const Matrix& d) {
  Matrix av = a * v;
  return av + av.transpose() + d;
}

/// Integrates from t0 to t1 with the largest step <= opts.dt that divides the span.
inline Trajectory solve_lyapunov(const LyapunovSystem& sys, const Matrix& v0, double t0, double t1,
                                 const LyapunovOptions& opts) {
  if (v0.rows() != sys.dim || v0.cols() != sys.dim)
    throw DimensionMismatch("solve_lyapunov: initial state does not match system dimension");
  if (!(opts.dt > 0.0)) throw InvalidArgument("solve_lyapunov: dt must be > 0");
  if (t1 < t0) throw InvalidArgument("solve_lyapunov: t1 < t0");

  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil((t1 - t0) / opts.dt - 1e-9)));
  const double h = steps > 0 ? (t1 - t0) / static_cast<double>(steps) : 0.0;

  Trajectory out;
  Matrix v = v0;
  if (opts.record_stride > 0) {
    out.times.push_back(t0);
    out.states.push_back(v);
  }

  const Eigen::Index check = std::min(opts.physical_block, sys.dim);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const Matrix a0 = sys.drift(t);
    const Matrix am = sys.drift(t + 0.5 * h);
    const Matrix a1 = sys.drift(t + h);
    const Matrix d0 = sys.diffusion(t);
    const Matrix dm = sys.diffusion(t + 0.5 * h);
    const Matrix d1 = sys.diffusion(t + h);

    const Matrix k1 = lyapunov_rhs(a0, v, d0);
    const Matrix k2 = lyapunov_rhs(am, v + 0.5 * h * k1, dm);
    const Matrix k3 = lyapunov_rhs(am, v + 0.5 * h * k2, dm);
    const Matrix k4 = lyapunov_rhs(a1, v + h * k3, d1);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v = 0.5 * (v + v.transpose()).eval();

    if (check > 0) {
      const auto nu = symplectic_eigenvalues(v.topLeftCorner(check, check));
      if (nu.front() < 1.0 - opts.physical_tol) {
        std::ostringstream msg;
        msg << "solve_lyapunov: symplectic eigenvalue " << nu.front() << " < 1 at t = " << t + h;
        throw NonPhysicalState(msg.str());
      }
    }
    if (opts.record_stride > 0 && ((k + 1) % opts.record_stride == 0 || k + 1 == steps)) {
      out.times.push_back(t + h);
      out.states.push_back(v);
    }
  }
  if (opts.record_stride == 0) {
    out.times.push_back(t1);
    out.states.push_back(std::move(v));
  }
  return out;
}

inline CovarianceMatrix solve_lyapunov(const LyapunovSystem& sys, const CovarianceMatrix& v0, double t0, double t1,
                                       const LyapunovOptions& opts) {
  LyapunovOptions final_only = opts;
  final_only.record_stride = 0;
  return {solve_lyapunov(sys, v0.matrix(), t0, t1, final_only).final_state(), v0.labels()};
}

}  // namespace pulsecorr
