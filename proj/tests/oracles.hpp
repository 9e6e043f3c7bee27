#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's integrator, matrix exponential or measure code.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

inline Mat expm(const Mat& a) { return a.exp(); }

/// Exact solution of dV/dt = A V + V A^T + D for constant A, D, via the
/// Van Loan block exponential.
inline Mat lyapunov_constant(const Mat& a, const Mat& d, const Mat& v0, double t) {
  const auto n = a.rows();
  Mat c = Mat::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -a;
  c.topRightCorner(n, n) = d;
  c.bottomRightCorner(n, n) = a.transpose();
  const Mat e = expm(c * t);
  const Mat phi = e.bottomRightCorner(n, n).transpose();  // exp(A t)
  const Mat integral = phi * e.topRightCorner(n, n);
  const Mat v = phi * v0 * phi.transpose() + integral;
  return 0.5 * (v + v.transpose());
}

/// Ideal two-mode squeezed vacuum with gain G, modes (B, m).
inline Mat tms(double gain) {
  const double cosh2r = 2.0 * gain - 1.0;
  const double sinh2r = 2.0 * std::sqrt(gain * (gain - 1.0));
  Mat v = Mat::Zero(4, 4);
  v.diagonal().setConstant(cosh2r);
  v(0, 2) = v(2, 0) = sinh2r;
  v(1, 3) = v(3, 1) = -sinh2r;
  return v;
}

/// Symplectic spectrum from the eigenvalues of -(Omega V)^2 (= nu^2, each twice).
inline std::vector<double> symplectic_spectrum(const Mat& v) {
  const auto n = v.rows() / 2;
  Mat omega = Mat::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  const Mat m = omega * v;
  Eigen::EigenSolver<Mat> es(-(m * m), false);
  std::vector<double> sq;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) sq.push_back(es.eigenvalues()(i).real());
  std::sort(sq.begin(), sq.end());
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < sq.size(); i += 2) out.push_back(std::sqrt(std::max(0.0, 0.5 * (sq[i] + sq[i + 1]))));
  return out;
}

/// Smallest symplectic eigenvalue of the partial transpose (P of the second mode flipped).
inline double partial_transpose_nu_minus(const Mat& v) {
  Mat t = Mat::Identity(4, 4);
  t(3, 3) = -1.0;
  return symplectic_spectrum(t * v * t).front();
}

/// Small deterministic generator for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Random symplectic matrix on two modes built from local rotations,
/// single-mode squeezers and a beam splitter.
inline Mat random_symplectic(Rng& rng) {
  auto local = [&](Eigen::Index k, double angle, double r) {
    Mat s = Mat::Identity(4, 4);
    const double c = std::cos(angle), sn = std::sin(angle);
    Eigen::Matrix2d rot;
    rot << c, sn, -sn, c;
    Eigen::Matrix2d sq = Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
    s.block<2, 2>(2 * k, 2 * k) = rot * sq;
    return s;
  };
  const double theta = rng.uniform(0.0, std::numbers::pi);
  Mat bs = Mat::Zero(4, 4);
  bs.block<2, 2>(0, 0) = std::cos(theta) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 2) = std::cos(theta) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(0, 2) = std::sin(theta) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 0) = -std::sin(theta) * Eigen::Matrix2d::Identity();
  const double tp = 2.0 * std::numbers::pi;
  return local(0, rng.uniform(0, tp), rng.uniform(-1, 1)) * local(1, rng.uniform(0, tp), rng.uniform(-1, 1)) * bs *
         local(0, rng.uniform(0, tp), rng.uniform(-1, 1)) * local(1, rng.uniform(0, tp), rng.uniform(-1, 1));
}

/// Random physical two-mode covariance matrix (Williamson form S diag(nu) S^T).
inline Mat random_physical_cm(Rng& rng) {
  const Mat s = random_symplectic(rng);
  Eigen::Vector4d nu;
  const double a = 1.0 + rng.uniform(0.0, 3.0), b = 1.0 + rng.uniform(0.0, 3.0);
  nu << a, a, b, b;
  Mat v = s * nu.asDiagonal() * s.transpose();
  return 0.5 * (v + v.transpose());
}

/// Minimum of the generalized-quadrature variance: coarse angle grid, then
/// compass search around the best grid point.
inline double brute_force_min_variance(const Mat& v, int grid) {
  auto var = [&](double phi, double tb, double tr) {
    Eigen::Vector4d c(std::cos(phi) * std::cos(tb), std::cos(phi) * std::sin(tb), std::sin(phi) * std::cos(tr),
                      std::sin(phi) * std::sin(tr));
    return c.dot(v * c);
  };
  double best = 1e300;
  double x[3] = {0, 0, 0};
  for (int i = 0; i <= grid; ++i) {
    const double phi = 0.5 * std::numbers::pi * i / grid;
    for (int j = 0; j < 2 * grid; ++j) {
      const double tb = std::numbers::pi * j / grid;
      for (int k = 0; k < 2 * grid; ++k) {
        const double tr = std::numbers::pi * k / grid;
        const double val = var(phi, tb, tr);
        if (val < best) {
          best = val;
          x[0] = phi;
          x[1] = tb;
          x[2] = tr;
        }
      }
    }
  }
  for (double h = std::numbers::pi / grid; h > 1e-12;) {
    bool moved = false;
    for (int d = 0; d < 3; ++d) {
      for (double sgn : {-1.0, 1.0}) {
        double y[3] = {x[0], x[1], x[2]};
        y[d] += sgn * h;
        const double val = var(y[0], y[1], y[2]);
        if (val < best) {
          best = val;
          x[0] = y[0];
          x[1] = y[1];
          x[2] = y[2];
          moved = true;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return best;
}

}  // namespace oracle
