#pragma once

#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/kernels.hpp"

namespace unanimous {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
  std::vector<double> coeffs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

// maximize objective . x subject to constraints and lower <= x <= upper.
struct LpProblem {
  LpProblem() = default;
  explicit LpProblem(std::size_t n)
      : num_vars(n), objective(n, 0.0), lower(n, 0.0), upper(n, kInfinity) {}

  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;

  void add(std::vector<double> coeffs, Relation relation, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
};

enum class PivotRule { Bland, Dantzig };

struct SimplexOptions {
  double tol = 1e-9;
  PivotRule rule = PivotRule::Bland;
  std::size_t max_iterations = 200000;  // CycleDetected beyond this
  Exec exec = default_exec();
};

// Dense two-phase tableau simplex.
LpResult solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

// {p : A p <= b}. Rows flagged equality_derived come in (+a, b), (-a, -b)
// pairs.
struct Polytope {
  RealMatrix A;
  std::vector<double> b;
  std::vector<bool> equality_derived;

  std::size_t dim() const { return A.cols(); }
  std::size_t num_rows() const { return A.rows(); }
  void add_row(std::span<const double> a, double rhs, bool equality);
};

// Coordinates follow vec(M) with index s * n_t + t. For each example i and
// target t there is an equality pair, then one non-negativity row per entry.
Polytope build_consistency_polytope(const Dataset& d);
Polytope build_consistency_polytope(const IntMatrix& S, const IntMatrix& T);

bool is_feasible(const Polytope& poly, const SimplexOptions& options = {});

struct InteriorPoint {
  std::vector<double> p1;
  double alpha_star = 1.0;
  std::vector<double> xi_star;
  std::vector<std::size_t> always_active;
  double radius = 0.0;
  RealMatrix N;  // dim x d, orthonormal columns spanning null(A_0)

  std::size_t dimension() const { return N.cols(); }
};

struct InteriorOptions {
  double tau_class = 1e-6;
  SimplexOptions simplex;
};

// Solves the slack-maximising LP, classifies rows, then re-solves twice to
// pick a canonical p* (least alpha, then least l1 norm) among the optima.
InteriorPoint relative_interior(const Polytope& poly,
                                const InteriorOptions& options = {});

// Uniform draw from the closed unit ball in R^d.
std::vector<double> sample_unit_ball(std::size_t d, std::mt19937_64& rng);

// p1 + R N v for v uniform in the unit ball.
std::vector<double> sample_second_point(const InteriorPoint& ip,
                                        std::mt19937_64& rng);

// Orthonormal basis (as columns) of the exact null space of the given rows.
RealMatrix orthonormal_null_basis(const RealMatrix& rows, std::size_t dim);

}  // namespace unanimous
