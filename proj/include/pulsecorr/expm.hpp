#pragma once

// Matrix exponential by scaling and squaring with a degree-13 Pade
// approximant (Higham 2005). Intended for the small dense drift matrices.

#include "pulsecorr/types.hpp"

#include <array>
#include <cmath>

namespace pulsecorr {

/// exp(A t) for t >= 0.
inline Matrix matrix_exponential(const Matrix& a, double t = 1.0) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix_exponential: matrix must be square");
  if (t < 0.0) throw InvalidArgument("matrix_exponential: t must be >= 0");

  const auto n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  if (t == 0.0) return ident;
  Matrix x = a * t;

  constexpr double kTheta13 = 5.371920351148152;
  constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};

  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    x /= std::ldexp(1.0, squarings);
  }

  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x4 * x2;
  const Matrix u =
      x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * ident);
  const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * ident;

  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace pulsecorr
