#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pulsecorr {

// Every matrix in this library is at most 8x8, so dense dynamic storage is enough.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance matrix violated the uncertainty relation beyond tolerance.
class NonPhysicalState : public Error {
 public:
  using Error::Error;
};

/// The requested temporal mode carries no mechanics-to-light transfer.
class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace pulsecorr
