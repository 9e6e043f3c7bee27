#pragma once

// Nonclassicality figures for Gaussian states and the Gaussian loss channel.
//
// Vacuum variance is 1, so two-mode squeezing in dB is -10 log10 of the
// smallest covariance eigenvalue.

#include "pulsecorr/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace pulsecorr {

enum class LogBase { Natural, Two };

struct HomodyneAngles {
  double phi = 0.0;      // weight between the two detected modes
  double theta_B = 0.0;  // local-oscillator angle on the first mode
  double theta_R = 0.0;  // local-oscillator angle on the second mode
};

struct Measures {
  double s_db = 0.0;
  double e_n = 0.0;
  double nu_minus = 1.0;
  double lambda_min = 1.0;
};

struct LogNegativity {
  double e_n = 0.0;
  double nu_minus = 1.0;
};

/// Pure-loss channel: V' = S V S^T + (1 - S S^T) with S = (+) sqrt(eta_k) 1_2.
inline CovarianceMatrix apply_loss(const CovarianceMatrix& v, std::span<const double> etas) {
  if (etas.size() != v.mode_count()) throw DimensionMismatch("apply_loss: one transmittance per mode required");
  const auto n = static_cast<Eigen::Index>(2 * etas.size());
  Vector s(n);
  for (std::size_t k = 0; k < etas.size(); ++k) {
    if (!(etas[k] >= 0.0 && etas[k] <= 1.0)) throw InvalidArgument("apply_loss: transmittance outside [0, 1]");
    s(2 * k) = s(2 * k + 1) = std::sqrt(etas[k]);
  }
  Matrix out = s.asDiagonal() * v.matrix() * s.asDiagonal();
  out.diagonal() += (Vector::Ones(n) - s.cwiseAbs2());
  return {std::move(out), v.labels()};
}

inline CovarianceMatrix apply_loss(const CovarianceMatrix& v, std::initializer_list<double> etas) {
  return apply_loss(v, std::span<const double>(etas.begin(), etas.size()));
}

inline double smallest_eigenvalue(const Matrix& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(v, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double two_mode_squeezing_db(const Matrix& v) {
  return -10.0 * std::log10(smallest_eigenvalue(v));
}

/// Symplectic spectrum in ascending order, one value per mode.
inline std::vector<double> symplectic_eigenvalues(const Matrix& v) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0)
    throw DimensionMismatch("symplectic_eigenvalues: need an even square matrix");
  const Matrix m = symplectic_form(v.rows() / 2) * v;
  Eigen::EigenSolver<Matrix> es(m, false);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i).imag()));
  std::sort(mags.begin(), mags.end());
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < mags.size(); i += 2) out.push_back(0.5 * (mags[i] + mags[i + 1]));
  return out;
}

inline bool is_physical(const Matrix& v, double tol = 1e-6) {
  const auto nu = symplectic_eigenvalues(v);
  return nu.empty() || nu.front() >= 1.0 - tol;
}

/// Logarithmic negativity of a two-mode state from the smaller symplectic
/// eigenvalue of its partial transpose.
inline LogNegativity log_negativity(const Matrix& v, LogBase base = LogBase::Natural) {
  if (v.rows() != 4 || v.cols() != 4) throw DimensionMismatch("log_negativity: two-mode covariance matrix required");
  const double det_l = v.topLeftCorner<2, 2>().determinant();
  const double det_m = v.bottomRightCorner<2, 2>().determinant();
  const double det_c = v.topRightCorner<2, 2>().determinant();
  const double sigma = det_l + det_m - 2.0 * det_c;

  // The full determinant from the spectrum stays accurate when entries are
  // large and the state is strongly squeezed.
  Eigen::SelfAdjointEigenSolver<Matrix> es(v, Eigen::EigenvaluesOnly);
  const double det = es.eigenvalues().prod();

  double disc = sigma * sigma - 4.0 * det;
  if (disc < 0.0) {
    if (disc < -1e-9 * sigma * sigma) throw NonPhysicalState("log_negativity: Sigma^2 < 4 det V");
    disc = 0.0;
  }
  // (Sigma - sqrt(disc)) / 2 rewritten without cancellation.
  const double nu_sq = 2.0 * det / (sigma + std::sqrt(disc));
  if (!(nu_sq > 0.0)) throw NonPhysicalState("log_negativity: non-positive partial-transpose eigenvalue");
  const double nu = std::sqrt(nu_sq);
  const double log_nu = base == LogBase::Natural ? std::log(nu) : std::log2(nu);
  return {std::max(0.0, -log_nu), nu};
}

inline Measures compute_measures(const Matrix& v, LogBase base = LogBase::Natural) {
  const auto ln = log_negativity(v, base);
  const double lam = smallest_eigenvalue(v);
  return {-10.0 * std::log10(lam), ln.e_n, ln.nu_minus, lam};
}

/// Unit weight vector of X_gen = X_B^thetaB cos(phi) + X_R^thetaR sin(phi).
inline Eigen::Vector4d homodyne_weights(const HomodyneAngles& a) {
  return {std::cos(a.phi) * std::cos(a.theta_B), std::cos(a.phi) * std::sin(a.theta_B),
          std::sin(a.phi) * std::cos(a.theta_R), std::sin(a.phi) * std::sin(a.theta_R)};
}

inline double gen_quad_variance(const Matrix& v, const HomodyneAngles& a) {
  if (v.rows() != 4 || v.cols() != 4) throw DimensionMismatch("gen_quad_variance: two-mode covariance matrix required");
  const Eigen::Vector4d c = homodyne_weights(a);
  return c.dot(v * c);
}

struct AngleOptimum {
  HomodyneAngles angles;
  double variance = 1.0;
};

namespace detail {
inline double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  return x < 0.0 ? x + two_pi : x;
}
}  // namespace detail

/// Homodyne angles minimizing the generalized-quadrature variance. The
/// optimum is the eigenvector of the smallest eigenvalue; phi is reported in
/// [0, pi/2] and the LO angles in [0, 2 pi).
inline AngleOptimum optimize_angles(const Matrix& v) {
  if (v.rows() != 4 || v.cols() != 4) throw DimensionMismatch("optimize_angles: two-mode covariance matrix required");
  Eigen::SelfAdjointEigenSolver<Matrix> es(v);
  const Vector c = es.eigenvectors().col(0);
  const double wb = std::hypot(c(0), c(1));
  const double wr = std::hypot(c(2), c(3));
  AngleOptimum out;
  out.angles.phi = std::atan2(wr, wb);
  out.angles.theta_B = wb > 0.0 ? detail::wrap_angle(std::atan2(c(1), c(0))) : 0.0;
  out.angles.theta_R = wr > 0.0 ? detail::wrap_angle(std::atan2(c(3), c(2))) : 0.0;
  out.variance = es.eigenvalues()(0);
  return out;
}

/// How the angles other than theta_B are chosen during a theta_B scan.
enum class AngleScanMode {
  Hold,           // phi and theta_R fixed at the global optimum
  ReoptimizePhi,  // theta_R fixed at the global optimum, phi minimized per theta_B
  ReoptimizeAll,  // phi and theta_R minimized per theta_B
};

/// Generalized-quadrature variance at a given theta_B; `optimum` supplies
/// the angles that are held fixed.
inline double scanned_variance(const Matrix& v, double theta_b, AngleScanMode mode, const HomodyneAngles& optimum) {
  const Eigen::Vector2d ub(std::cos(theta_b), std::sin(theta_b));
  switch (mode) {
    case AngleScanMode::Hold:
      return gen_quad_variance(v, {optimum.phi, theta_b, optimum.theta_R});
    case AngleScanMode::ReoptimizePhi: {
      // Minimum over phi is the smallest eigenvalue of V compressed onto the
      // plane spanned by the two fixed single-mode directions.
      Eigen::Matrix<double, 4, 2> q = Eigen::Matrix<double, 4, 2>::Zero();
      q.block<2, 1>(0, 0) = ub;
      q.block<2, 1>(2, 1) = Eigen::Vector2d(std::cos(optimum.theta_R), std::sin(optimum.theta_R));
      const Eigen::Matrix2d c = q.transpose() * v * q;
      return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c, Eigen::EigenvaluesOnly).eigenvalues()(0);
    }
    case AngleScanMode::ReoptimizeAll: {
      Eigen::Matrix<double, 4, 3> q = Eigen::Matrix<double, 4, 3>::Zero();
      q.block<2, 1>(0, 0) = ub;
      q(2, 1) = 1.0;
      q(3, 2) = 1.0;
      const Eigen::Matrix3d c = q.transpose() * v * q;
      return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(c, Eigen::EigenvaluesOnly).eigenvalues()(0);
    }
  }
  return gen_quad_variance(v, optimum);
}

/// Total theta_B measure (radians, over one period pi) on which the scanned
/// variance is below shot noise. Sign changes found on a grid are refined by bisection.
inline double squeezing_window_width(const Matrix& v, AngleScanMode mode, std::size_t grid = 4096) {
  const auto opt = optimize_angles(v);
  auto excess = [&](double th) { return 1.0 - scanned_variance(v, th, mode, opt.angles); };
  const double start = opt.angles.theta_B - std::numbers::pi / 2.0;
  const double step = std::numbers::pi / static_cast<double>(grid);
  auto refine = [&](double lo, double hi) {
    const bool lo_pos = excess(lo) > 0.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((excess(mid) > 0.0) == lo_pos ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  double width = 0.0;
  double prev_t = start;
  bool prev_in = excess(prev_t) > 0.0;
  double enter = prev_in ? start : 0.0;
  for (std::size_t k = 1; k <= grid; ++k) {
    const double t = start + static_cast<double>(k) * step;
    const bool in = excess(t) > 0.0;
    if (in != prev_in) {
      const double edge = refine(prev_t, t);
      if (in) enter = edge;
      else width += edge - enter;
    }
    prev_t = t;
    prev_in = in;
  }
  if (prev_in) width += (start + std::numbers::pi) - enter;
  return width;
}

}  // namespace pulsecorr
