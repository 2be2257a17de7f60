#include "unanimous/rational.hpp"

#include <cmath>

namespace unanimous {

namespace {

Rational exact(double v) {
  if (!std::isfinite(v)) throw DimensionMismatch("non-finite value");
  Rational q(v);  // mpq_set_d is exact
  q.canonicalize();
  return q;
}

}  // namespace

RationalMatrix to_rational(const IntMatrix& m) {
  RationalMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    out.data()[i] = Rational(static_cast<long>(m.data()[i]));
  }
  return out;
}

RationalMatrix to_rational(const RealMatrix& m) {
  RationalMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    out.data()[i] = exact(m.data()[i]);
  }
  return out;
}

RationalVector to_rational(const CountVector& v) {
  RationalVector out;
  out.reserve(v.size());
  for (auto c : v.counts) out.emplace_back(static_cast<long>(c));
  return out;
}

RationalVector to_rational(std::span<const double> v) {
  RationalVector out;
  out.reserve(v.size());
  for (double d : v) out.push_back(exact(d));
  return out;
}

RealMatrix to_real(const RationalMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    out.data()[i] = m.data()[i].get_d();
  }
  return out;
}

RationalMatrix transpose(const RationalMatrix& m) {
  RationalMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  }
  return out;
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("multiply: inner dims");
  RationalMatrix out(a.rows(), b.cols());
  Rational tmp;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (sgn(a(i, k)) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        if (sgn(b(k, j)) == 0) continue;
        tmp = a(i, k) * b(k, j);
        out(i, j) += tmp;
      }
    }
  }
  return out;
}

RationalVector multiply(std::span<const Rational> row, const RationalMatrix& m) {
  if (row.size() != m.rows()) throw DimensionMismatch("multiply: row length");
  RationalVector out(m.cols());
  Rational tmp;
  for (std::size_t k = 0; k < m.rows(); ++k) {
    if (sgn(row[k]) == 0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (sgn(m(k, j)) == 0) continue;
      tmp = row[k] * m(k, j);
      out[j] += tmp;
    }
  }
  return out;
}

bool is_integral(const Rational& q) { return q.get_den() == 1; }

}  // namespace unanimous
