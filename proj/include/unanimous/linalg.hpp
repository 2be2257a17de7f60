#pragma once

#include <optional>
#include <span>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/kernels.hpp"
#include "unanimous/rational.hpp"

namespace unanimous {

struct RrefResult {
  RationalMatrix rref;
  std::vector<std::size_t> pivot_cols;
  std::size_t rank = 0;
  // transform * input == rref. Empty unless requested.
  RationalMatrix transform;
};

struct RrefOptions {
  bool with_transform = true;
  // Pivots are only taken in columns [0, pivot_col_end); later columns are
  // carried along. Defaults to all columns.
  std::optional<std::size_t> pivot_col_end;
  Exec exec = default_exec();
};

// Exact reduced row echelon form. The pivot in each column is the first
// remaining row with a non-zero entry.
RrefResult rref(const RationalMatrix& m, const RrefOptions& options = {});

// Cached reduction of S answering row-space membership queries.
class RowSpace {
 public:
  explicit RowSpace(const RationalMatrix& S);

  std::size_t rank() const { return reduced_.rank; }
  std::size_t dimension() const { return reduced_.rref.cols(); }
  const RrefResult& reduction() const { return reduced_; }

  // Some alpha with alpha^T S == x, or nullopt when x is outside the row space.
  std::optional<RationalVector> coefficients(std::span<const Rational> x) const;
  // Coordinates of x in the basis formed by the non-zero rref rows.
  std::optional<RationalVector> basis_coordinates(
      std::span<const Rational> x) const;
  bool contains(std::span<const Rational> x) const {
    return basis_coordinates(x).has_value();
  }

 private:
  RrefResult reduced_;
};

std::optional<RationalVector> row_space_membership(const RationalMatrix& S,
                                                   std::span<const Rational> x);

struct NullBasis {
  // Columns span {b : S b = 0}.
  RationalMatrix B;
  std::size_t dimension() const { return B.cols(); }
  // Source atoms whose row of B is identically zero.
  std::vector<std::size_t> zero_rows() const;
};

NullBasis null_space_basis(const RationalMatrix& S);

// Inverse of a square non-singular matrix; throws DimensionMismatch when
// singular.
RationalMatrix inverse(const RationalMatrix& m);

struct LeastSquaresFit {
  RationalMatrix exact;  // S^+ T
  RealMatrix mapping;
};

// Minimum-norm least-squares mapping S^+ T computed exactly through the
// rank factorisation S = C F.
LeastSquaresFit least_squares(const IntMatrix& S, const IntMatrix& T);

struct L1Fit {
  RealMatrix mapping;
  std::vector<double> residuals;  // per training row, ||S_i M - T_i||_1
};

// Real-valued M minimising ||SM - T||_1 (one LP per target column).
L1Fit l1_residual_fit(const IntMatrix& S, const IntMatrix& T);

// Exact test that SM = T has a real solution: rank(S) == rank([S|T]).
bool linear_system_consistent(const IntMatrix& S, const IntMatrix& T);

}  // namespace unanimous
