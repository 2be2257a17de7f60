#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/lp.hpp"

namespace unanimous {

struct IlpProblem {
  LpProblem lp;
  std::vector<bool> integral;  // per variable
};

struct IlpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // integral entries already rounded
  double value = 0.0;
  std::size_t nodes = 0;
};

struct IlpOptions {
  std::size_t node_cap = 1000000;  // BudgetExceeded beyond this
  double int_tol = 1e-6;
  SimplexOptions simplex;
};

// Depth-first branch and bound on the most fractional variable; of the two
// children the one with the better LP bound is explored first.
IlpResult solve_ilp(const IlpProblem& problem, const IlpOptions& options = {});

// Constraints over vec(M) (index s * num_target + t, first in the variable
// list) plus any auxiliary variables.
struct ConstraintSet {
  IlpProblem problem;
  std::size_t num_source = 0;
  std::size_t num_target = 0;
};

// U_st = min over examples i using s of floor((T_it + budget) / S_is); 0 for
// atoms no example uses. Every M >= 0 with ||SM - T||_1 <= budget lies in
// [0, U].
IntMatrix mapping_upper_bounds(const IntMatrix& S, const IntMatrix& T,
                               std::int64_t budget = 0);

ConstraintSet build_exact_consistency(const Dataset& d);
// {M >= 0 integral : ||SM - T||_1 <= n_mistakes} via e+ / e- per cell.
ConstraintSet build_noise_consistency(const Dataset& d, std::int64_t n_mistakes);

struct DenotationExample {
  CountVector input;
  std::vector<CountVector> candidates;  // rows of T_i
};

struct DenotationData {
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::vector<DenotationExample> examples;
};

enum class Relaxation { Integer, Linear };

// Variables are vec(M) then one selector pi_ij per candidate. Integer mode
// makes M and pi integral (pi binary); Linear mode keeps M >= 0 and
// pi in [0, 1] real.
ConstraintSet build_denotation_consistency(const DenotationData& data,
                                           Relaxation relaxation = Relaxation::Integer);

struct Projection {
  double min = 0.0;
  double max = 0.0;
  std::vector<double> argmin;  // full variable vector attaining min
};

// min and max of x M v over the constraint set; nullopt when it is empty.
std::optional<Projection> minmax_projection(const ConstraintSet& cs,
                                            const CountVector& x,
                                            std::span<const double> v,
                                            const IlpOptions& options = {});

// The unanimity test on projection values.
bool projections_agree(double a, double b);

// Column-local consistency for one target column, restricted to the given
// source atoms and training rows. Variables are m_s per listed source
// (integral, bounded by `upper`) then e+ and e- per listed row. With budget 0
// and a capped residual the block is the plain equality system and has no e
// variables; free_residual drops the budget row.
struct ColumnBlock {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> rows;
  std::size_t column = 0;
  std::int64_t budget = 0;
  bool free_residual = false;
};

IlpProblem build_column_block(const IntMatrix& S, const IntMatrix& T,
                              const ColumnBlock& block, const IntMatrix& upper);

}  // namespace unanimous
