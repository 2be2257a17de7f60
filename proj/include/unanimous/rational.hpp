#pragma once

#include <gmpxx.h>

#include <span>
#include <vector>

#include "unanimous/core.hpp"

namespace unanimous {

// GMP rationals are kept canonical (lowest terms, positive denominator) by
// every arithmetic operation we use.
using Rational = mpq_class;
using RationalMatrix = Matrix<Rational>;
using RationalVector = std::vector<Rational>;

RationalMatrix to_rational(const IntMatrix& m);
// Exact: every finite double is a dyadic rational.
RationalMatrix to_rational(const RealMatrix& m);
RationalVector to_rational(const CountVector& v);
RationalVector to_rational(std::span<const double> v);

RealMatrix to_real(const RationalMatrix& m);

RationalMatrix transpose(const RationalMatrix& m);
RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
// Row vector times matrix.
RationalVector multiply(std::span<const Rational> row, const RationalMatrix& m);

bool is_integral(const Rational& q);

}  // namespace unanimous
