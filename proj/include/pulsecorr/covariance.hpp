#pragma once

#include "pulsecorr/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pulsecorr {

namespace modes {
inline constexpr std::string_view kCavity = "cav";
inline constexpr std::string_view kMechanics = "mech";
inline constexpr std::string_view kPulseB = "pulseB";
inline constexpr std::string_view kPulseR = "pulseR";
}  // namespace modes

/// Symmetrized second moments of a set of modes, two quadratures per mode
/// in (X, P) order, with one label per mode.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;

  CovarianceMatrix(Matrix entries, std::vector<std::string> labels)
      : entries_(std::move(entries)), labels_(std::move(labels)) {
    if (entries_.rows() != entries_.cols())
      throw DimensionMismatch("CovarianceMatrix: entries must be square");
    if (static_cast<std::size_t>(entries_.rows()) != 2 * labels_.size())
      throw DimensionMismatch("CovarianceMatrix: expected two quadratures per label");
  }

  static CovarianceMatrix vacuum(std::vector<std::string> labels) {
    const auto n = static_cast<Eigen::Index>(2 * labels.size());
    return {Matrix::Identity(n, n), std::move(labels)};
  }

  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] Matrix& matrix() { return entries_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t mode_count() const { return labels_.size(); }

  [[nodiscard]] bool has_mode(std::string_view label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  [[nodiscard]] Eigen::Index index_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw InvalidArgument("CovarianceMatrix: no mode labelled '" + std::string(label) + "'");
    return static_cast<Eigen::Index>(it - labels_.begin());
  }

  /// 2x2 block between two modes.
  [[nodiscard]] Eigen::Matrix2d block(std::string_view row, std::string_view col) const {
    return entries_.block<2, 2>(2 * index_of(row), 2 * index_of(col));
  }

  /// Reduced state on the listed modes, in the listed order (partial trace and reordering).
  [[nodiscard]] CovarianceMatrix select(std::span<const std::string_view> wanted) const {
    const auto n = static_cast<Eigen::Index>(wanted.size());
    Matrix out(2 * n, 2 * n);
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ri = index_of(wanted[i]);
      labels.emplace_back(wanted[i]);
      for (Eigen::Index j = 0; j < n; ++j)
        out.block<2, 2>(2 * i, 2 * j) = entries_.block<2, 2>(2 * ri, 2 * index_of(wanted[j]));
    }
    return {std::move(out), std::move(labels)};
  }

  [[nodiscard]] CovarianceMatrix select(std::initializer_list<std::string_view> wanted) const {
    return select(std::span<const std::string_view>(wanted.begin(), wanted.size()));
  }

  /// Applies a local phase-space rotation (X, P) -> R2(angle) (X, P) to one mode.
  void rotate_mode(std::string_view label, double angle) {
    const Eigen::Index k = 2 * index_of(label);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Matrix r = Matrix::Identity(entries_.rows(), entries_.cols());
    r(k, k) = c;
    r(k, k + 1) = s;
    r(k + 1, k) = -s;
    r(k + 1, k + 1) = c;
    entries_ = r * entries_ * r.transpose();
  }

  void symmetrize() { entries_ = 0.5 * (entries_ + entries_.transpose()).eval(); }

 private:
  Matrix entries_;
  std::vector<std::string> labels_;
};

/// Block-diagonal symplectic form (+) [[0, 1], [-1, 0]] for `mode_count` modes.
inline Matrix symplectic_form(Eigen::Index mode_count) {
  Matrix omega = Matrix::Zero(2 * mode_count, 2 * mode_count);
  for (Eigen::Index k = 0; k < mode_count; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

}  // namespace pulsecorr
