#include "unanimous/ilp.hpp"

#include <algorithm>
#include <cmath>

namespace unanimous {

IlpResult solve_ilp(const IlpProblem& problem, const IlpOptions& options) {
  const std::size_t n = problem.lp.num_vars;
  if (problem.integral.size() != n) throw DimensionMismatch("integrality flags");

  struct Node {
    std::vector<double> lower, upper;
    LpResult relaxation;
  };

  LpProblem work = problem.lp;
  auto relax = [&](const std::vector<double>& lo, const std::vector<double>& up) {
    work.lower = lo;
    work.upper = up;
    return solve_lp(work, options.simplex);
  };

  IlpResult result;
  // Integral variables only take integral bounds.
  std::vector<double> lo = problem.lp.lower, up = problem.lp.upper;
  for (std::size_t j = 0; j < n; ++j) {
    if (!problem.integral[j]) continue;
    if (std::isfinite(lo[j])) lo[j] = std::ceil(lo[j] - options.int_tol);
    if (std::isfinite(up[j])) up[j] = std::floor(up[j] + options.int_tol);
  }
  auto root = relax(lo, up);
  if (root.status == LpStatus::Infeasible) return result;
  if (root.status == LpStatus::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  bool have_incumbent = false;
  std::vector<Node> stack;
  stack.push_back({std::move(lo), std::move(up), std::move(root)});
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++result.nodes > options.node_cap) {
      throw BudgetExceeded("branch and bound node cap reached");
    }
    const double bound = node.relaxation.value;
    if (have_incumbent &&
        bound <= result.value + 1e-9 * (1.0 + std::abs(result.value))) {
      continue;
    }

    const auto& x = node.relaxation.x;
    std::size_t branch = n;
    double widest = options.int_tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!problem.integral[j]) continue;
      const double frac = x[j] - std::floor(x[j]);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist > widest) {
        widest = dist;
        branch = j;
      }
    }

    if (branch == n) {
      std::vector<double> point = x;
      for (std::size_t j = 0; j < n; ++j) {
        if (problem.integral[j]) point[j] = std::round(point[j]);
      }
      double value = 0.0;
      for (std::size_t j = 0; j < n; ++j) value += problem.lp.objective[j] * point[j];
      if (!have_incumbent || value > result.value) {
        have_incumbent = true;
        result.value = value;
        result.x = std::move(point);
      }
      continue;
    }

    Node down{node.lower, node.upper, {}};
    down.upper[branch] = std::floor(x[branch]);
    down.relaxation = relax(down.lower, down.upper);
    Node upc{std::move(node.lower), std::move(node.upper), {}};
    upc.lower[branch] = std::ceil(x[branch]);
    upc.relaxation = relax(upc.lower, upc.upper);

    const bool down_ok = down.relaxation.status == LpStatus::Optimal;
    const bool up_ok = upc.relaxation.status == LpStatus::Optimal;
    if (down_ok && up_ok) {
      if (down.relaxation.value >= upc.relaxation.value) {
        stack.push_back(std::move(upc));
        stack.push_back(std::move(down));
      } else {
        stack.push_back(std::move(down));
        stack.push_back(std::move(upc));
      }
    } else if (down_ok) {
      stack.push_back(std::move(down));
    } else if (up_ok) {
      stack.push_back(std::move(upc));
    }
  }
  if (have_incumbent) result.status = LpStatus::Optimal;
  return result;
}

IntMatrix mapping_upper_bounds(const IntMatrix& S, const IntMatrix& T,
                               std::int64_t budget) {
  if (S.rows() != T.rows()) throw DimensionMismatch("bounds: row counts");
  IntMatrix U(S.cols(), T.cols(), -1);
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (std::size_t s = 0; s < S.cols(); ++s) {
      const auto c = S(i, s);
      if (c <= 0) continue;
      for (std::size_t t = 0; t < T.cols(); ++t) {
        const std::int64_t u = (T(i, t) + budget) / c;
        if (U(s, t) < 0 || u < U(s, t)) U(s, t) = u;
      }
    }
  }
  for (auto& u : U.data()) u = std::max<std::int64_t>(u, 0);
  return U;
}

namespace {

ConstraintSet mapping_variables(std::size_t ns, std::size_t nt,
                                const IntMatrix& U, std::size_t extra) {
  ConstraintSet cs;
  cs.num_source = ns;
  cs.num_target = nt;
  cs.problem.lp = LpProblem(ns * nt + extra);
  cs.problem.integral.assign(ns * nt + extra, false);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      cs.problem.lp.upper[s * nt + t] = static_cast<double>(U(s, t));
      cs.problem.integral[s * nt + t] = true;
    }
  }
  return cs;
}

}  // namespace

ConstraintSet build_exact_consistency(const Dataset& d) {
  return build_noise_consistency(d, 0);
}

ConstraintSet build_noise_consistency(const Dataset& d, std::int64_t n_mistakes) {
  if (n_mistakes < 0) throw DimensionMismatch("negative noise budget");
  const auto& S = d.S();
  const auto& T = d.T();
  const std::size_t n = d.size(), ns = d.num_source(), nt = d.num_target();
  const std::size_t cells = n * nt;
  const bool noisy = n_mistakes > 0;
  auto cs = mapping_variables(ns, nt, mapping_upper_bounds(S, T, n_mistakes),
                              noisy ? 2 * cells : 0);
  auto& lp = cs.problem.lp;
  const std::size_t width = lp.num_vars, base = ns * nt;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      std::vector<double> row(width, 0.0);
      for (std::size_t s = 0; s < ns; ++s) row[s * nt + t] = static_cast<double>(S(i, s));
      if (noisy) {
        row[base + i * nt + t] = -1.0;
        row[base + cells + i * nt + t] = 1.0;
      }
      lp.add(std::move(row), Relation::Equal, static_cast<double>(T(i, t)));
    }
  }
  if (noisy) {
    std::vector<double> row(width, 0.0);
    for (std::size_t k = base; k < width; ++k) row[k] = 1.0;
    lp.add(std::move(row), Relation::LessEqual, static_cast<double>(n_mistakes));
  }
  return cs;
}

ConstraintSet build_denotation_consistency(const DenotationData& data,
                                           Relaxation relaxation) {
  const std::size_t ns = data.source_vocab.size(), nt = data.target_vocab.size();
  std::size_t n_pi = 0;
  for (const auto& ex : data.examples) {
    if (ex.candidates.empty()) throw DimensionMismatch("example without candidates");
    if (ex.input.size() != ns) throw DimensionMismatch("denotation input width");
    for (const auto& c : ex.candidates) {
      if (c.size() != nt) throw DimensionMismatch("denotation candidate width");
    }
    n_pi += ex.candidates.size();
  }

  // Bound each M entry by the largest candidate count it could produce.
  RealMatrix U(ns, nt, -1.0);
  for (const auto& ex : data.examples) {
    for (std::size_t s = 0; s < ns; ++s) {
      if (ex.input[s] <= 0) continue;
      for (std::size_t t = 0; t < nt; ++t) {
        std::int64_t top = 0;
        for (const auto& c : ex.candidates) top = std::max(top, c[t]);
        const double u = static_cast<double>(top) / static_cast<double>(ex.input[s]);
        if (U(s, t) < 0.0 || u < U(s, t)) U(s, t) = u;
      }
    }
  }

  const bool integer = relaxation == Relaxation::Integer;
  auto cs = mapping_variables(ns, nt, IntMatrix(ns, nt), n_pi);
  auto& lp = cs.problem.lp;
  const std::size_t width = lp.num_vars;
  for (std::size_t k = 0; k < ns * nt; ++k) {
    const double u = std::max(U.data()[k], 0.0);
    lp.upper[k] = integer ? std::floor(u) : u;
    cs.problem.integral[k] = integer;
  }
  std::size_t pi = ns * nt;
  for (const auto& ex : data.examples) {
    const std::size_t k = ex.candidates.size();
    for (std::size_t j = 0; j < k; ++j) {
      lp.upper[pi + j] = 1.0;
      cs.problem.integral[pi + j] = integer;
    }
    for (std::size_t t = 0; t < nt; ++t) {
      std::vector<double> row(width, 0.0);
      for (std::size_t s = 0; s < ns; ++s) row[s * nt + t] = static_cast<double>(ex.input[s]);
      for (std::size_t j = 0; j < k; ++j) {
        row[pi + j] = -static_cast<double>(ex.candidates[j][t]);
      }
      lp.add(std::move(row), Relation::Equal, 0.0);
    }
    std::vector<double> row(width, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[pi + j] = 1.0;
    lp.add(std::move(row), Relation::Equal, 1.0);
    pi += k;
  }
  return cs;
}

std::optional<Projection> minmax_projection(const ConstraintSet& cs,
                                            const CountVector& x,
                                            std::span<const double> v,
                                            const IlpOptions& options) {
  const std::size_t ns = cs.num_source, nt = cs.num_target;
  if (x.size() != ns) throw DimensionMismatch("projection: input width");
  if (v.size() != nt) throw DimensionMismatch("projection: direction width");

  IlpProblem p = cs.problem;
  std::fill(p.lp.objective.begin(), p.lp.objective.end(), 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (x[s] == 0) continue;
    for (std::size_t t = 0; t < nt; ++t) {
      p.lp.objective[s * nt + t] = static_cast<double>(x[s]) * v[t];
    }
  }
  const auto hi = solve_ilp(p, options);
  if (hi.status == LpStatus::Infeasible) return std::nullopt;
  for (auto& c : p.lp.objective) c = -c;
  const auto lo = solve_ilp(p, options);
  if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
    throw Error("minmax_projection: unbounded objective");
  }
  return Projection{-lo.value, hi.value, lo.x};
}

bool projections_agree(double a, double b) {
  return std::abs(a - b) <= 1e-6 * (1.0 + std::abs(a));
}

IlpProblem build_column_block(const IntMatrix& S, const IntMatrix& T,
                              const ColumnBlock& block, const IntMatrix& upper) {
  const std::size_t k = block.sources.size(), r = block.rows.size();
  const bool exact = block.budget == 0 && !block.free_residual;
  const std::size_t width = k + (exact ? 0 : 2 * r);
  IlpProblem p{LpProblem(width), std::vector<bool>(width, false)};
  for (std::size_t j = 0; j < k; ++j) {
    p.lp.upper[j] = static_cast<double>(upper(block.sources[j], block.column));
    p.integral[j] = true;
  }
  for (std::size_t q = 0; q < r; ++q) {
    const auto i = block.rows[q];
    std::vector<double> row(width, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = static_cast<double>(S(i, block.sources[j]));
    }
    if (!exact) {
      row[k + q] = -1.0;
      row[k + r + q] = 1.0;
    }
    p.lp.add(std::move(row), Relation::Equal,
             static_cast<double>(T(i, block.column)));
  }
  if (!exact && !block.free_residual) {
    std::vector<double> row(width, 0.0);
    for (std::size_t j = k; j < width; ++j) row[j] = 1.0;
    p.lp.add(std::move(row), Relation::LessEqual, static_cast<double>(block.budget));
  }
  return p;
}

}  // namespace unanimous
