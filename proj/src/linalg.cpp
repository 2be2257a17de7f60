#include "unanimous/linalg.hpp"

#include <cmath>
#include <utility>

#include "unanimous/lp.hpp"

namespace unanimous {

RrefResult rref(const RationalMatrix& m, const RrefOptions& options) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const std::size_t width = cols + (options.with_transform ? rows : 0);
  const std::size_t end = std::min(options.pivot_col_end.value_or(cols), cols);

  RationalMatrix work(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) work(r, c) = m(r, c);
    if (options.with_transform) work(r, cols + r) = 1;
  }

  RrefResult out;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < end && rank < rows; ++c) {
    std::size_t r = rank;
    while (r < rows && sgn(work(r, c)) == 0) ++r;
    if (r == rows) continue;
    if (r != rank) {
      for (std::size_t j = 0; j < width; ++j) std::swap(work(r, j), work(rank, j));
    }
    const Rational p = work(rank, c);
    for (std::size_t j = c; j < width; ++j) {
      if (sgn(work(rank, j)) != 0) work(rank, j) /= p;
    }
    kernels::eliminate(work, rank, c, c, options.exec);
    out.pivot_cols.push_back(c);
    ++rank;
  }
  out.rank = rank;

  out.rref = RationalMatrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.rref(r, c) = work(r, c);
  }
  if (options.with_transform) {
    out.transform = RationalMatrix(rows, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < rows; ++c) out.transform(r, c) = work(r, cols + c);
    }
  }
  return out;
}

RowSpace::RowSpace(const RationalMatrix& S) : reduced_(rref(S)) {}

std::optional<RationalVector> RowSpace::basis_coordinates(
    std::span<const Rational> x) const {
  const auto& R = reduced_.rref;
  if (x.size() != R.cols()) throw DimensionMismatch("row_space: vector length");
  RationalVector beta(reduced_.rank);
  for (std::size_t k = 0; k < reduced_.rank; ++k) beta[k] = x[reduced_.pivot_cols[k]];
  Rational acc, tmp;
  for (std::size_t j = 0; j < R.cols(); ++j) {
    acc = x[j];
    for (std::size_t k = 0; k < reduced_.rank; ++k) {
      if (sgn(beta[k]) == 0 || sgn(R(k, j)) == 0) continue;
      tmp = beta[k] * R(k, j);
      acc -= tmp;
    }
    if (sgn(acc) != 0) return std::nullopt;
  }
  return beta;
}

std::optional<RationalVector> RowSpace::coefficients(
    std::span<const Rational> x) const {
  auto beta = basis_coordinates(x);
  if (!beta) return std::nullopt;
  const auto& E = reduced_.transform;
  RationalVector alpha(E.cols());
  Rational tmp;
  for (std::size_t k = 0; k < reduced_.rank; ++k) {
    if (sgn((*beta)[k]) == 0) continue;
    for (std::size_t i = 0; i < E.cols(); ++i) {
      if (sgn(E(k, i)) == 0) continue;
      tmp = (*beta)[k] * E(k, i);
      alpha[i] += tmp;
    }
  }
  return alpha;
}

std::optional<RationalVector> row_space_membership(
    const RationalMatrix& S, std::span<const Rational> x) {
  return RowSpace(S).coefficients(x);
}

std::vector<std::size_t> NullBasis::zero_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < B.rows(); ++r) {
    bool zero = true;
    for (std::size_t c = 0; c < B.cols() && zero; ++c) zero = sgn(B(r, c)) == 0;
    if (zero) out.push_back(r);
  }
  return out;
}

NullBasis null_space_basis(const RationalMatrix& S) {
  RrefOptions opts;
  opts.with_transform = false;
  auto red = rref(S, opts);
  const std::size_t n = S.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto c : red.pivot_cols) is_pivot[c] = true;

  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < n; ++c) {
    if (!is_pivot[c]) free_cols.push_back(c);
  }
  NullBasis out{RationalMatrix(n, free_cols.size())};
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    const auto f = free_cols[k];
    out.B(f, k) = 1;
    for (std::size_t p = 0; p < red.rank; ++p) {
      out.B(red.pivot_cols[p], k) = -red.rref(p, f);
    }
  }
  return out;
}

RationalMatrix inverse(const RationalMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("inverse: not square");
  const std::size_t n = m.rows();
  RationalMatrix aug(n, 2 * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = m(r, c);
    aug(r, n + r) = 1;
  }
  RrefOptions opts;
  opts.with_transform = false;
  opts.pivot_col_end = n;
  auto red = rref(aug, opts);
  if (red.rank < n) throw DimensionMismatch("inverse: singular matrix");
  RationalMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = red.rref(r, n + c);
  }
  return out;
}

LeastSquaresFit least_squares(const IntMatrix& S, const IntMatrix& T) {
  if (S.rows() != T.rows()) throw DimensionMismatch("least_squares: row counts");
  const auto Sq = to_rational(S);
  const auto Tq = to_rational(T);
  RrefOptions opts;
  opts.with_transform = false;
  const auto red = rref(Sq, opts);
  const std::size_t r = red.rank;

  LeastSquaresFit fit{RationalMatrix(S.cols(), T.cols()), RealMatrix()};
  if (r > 0) {
    RationalMatrix C(S.rows(), r), F(r, S.cols());
    for (std::size_t i = 0; i < S.rows(); ++i) {
      for (std::size_t k = 0; k < r; ++k) C(i, k) = Sq(i, red.pivot_cols[k]);
    }
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t j = 0; j < S.cols(); ++j) F(k, j) = red.rref(k, j);
    }
    const auto Ct = transpose(C);
    const auto Ft = transpose(F);
    const auto G = multiply(inverse(multiply(Ct, C)), multiply(Ct, Tq));
    const auto H = multiply(inverse(multiply(F, Ft)), G);
    fit.exact = multiply(Ft, H);
  }
  fit.mapping = to_real(fit.exact);
  return fit;
}

L1Fit l1_residual_fit(const IntMatrix& S, const IntMatrix& T) {
  if (S.rows() != T.rows()) throw DimensionMismatch("l1_residual_fit: row counts");
  const std::size_t n = S.rows(), ns = S.cols(), nt = T.cols();
  L1Fit fit{RealMatrix(ns, nt), std::vector<double>(n, 0.0)};
  if (n == 0) return fit;

  std::vector<std::size_t> seen;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (S(i, s) != 0) {
        seen.push_back(s);
        break;
      }
    }
  }
  const std::size_t k = seen.size();
  for (std::size_t t = 0; t < nt; ++t) {
    // Variables: m (free, k), e+ (n), e- (n).
    LpProblem lp(k + 2 * n);
    for (std::size_t j = 0; j < k; ++j) lp.lower[j] = -kInfinity;
    for (std::size_t i = 0; i < 2 * n; ++i) lp.objective[k + i] = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(k + 2 * n, 0.0);
      for (std::size_t j = 0; j < k; ++j) row[j] = static_cast<double>(S(i, seen[j]));
      row[k + i] = -1.0;
      row[k + n + i] = 1.0;
      lp.add(std::move(row), Relation::Equal, static_cast<double>(T(i, t)));
    }
    auto res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) {
      throw Error("l1_residual_fit: LP did not reach an optimum");
    }
    for (std::size_t j = 0; j < k; ++j) fit.mapping(seen[j], t) = res.x[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      double y = 0.0;
      for (std::size_t s = 0; s < ns; ++s) y += static_cast<double>(S(i, s)) * fit.mapping(s, t);
      r += std::abs(y - static_cast<double>(T(i, t)));
    }
    fit.residuals[i] = r;
  }
  return fit;
}

bool linear_system_consistent(const IntMatrix& S, const IntMatrix& T) {
  if (S.rows() != T.rows()) throw DimensionMismatch("consistency: row counts");
  RationalMatrix aug(S.rows(), S.cols() + T.cols());
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (std::size_t s = 0; s < S.cols(); ++s) aug(i, s) = static_cast<long>(S(i, s));
    for (std::size_t t = 0; t < T.cols(); ++t) {
      aug(i, S.cols() + t) = static_cast<long>(T(i, t));
    }
  }
  RrefOptions opts;
  opts.with_transform = false;
  opts.pivot_col_end = S.cols();
  auto red = rref(aug, opts);
  for (std::size_t r = red.rank; r < aug.rows(); ++r) {
    for (std::size_t c = S.cols(); c < aug.cols(); ++c) {
      if (sgn(red.rref(r, c)) != 0) return false;
    }
  }
  return true;
}

}  // namespace unanimous
