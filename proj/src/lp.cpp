#include "unanimous/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "unanimous/linalg.hpp"
#include "unanimous/rational.hpp"

namespace unanimous {

void LpProblem::add(std::vector<double> coeffs, Relation relation, double rhs) {
  if (coeffs.size() != num_vars) throw DimensionMismatch("constraint width");
  constraints.push_back({std::move(coeffs), relation, rhs});
}

namespace {

// x_j = offset + sum coef * y_col over the non-negative standard-form
// columns y.
struct VarMap {
  double offset = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
};

struct StdRow {
  std::vector<double> a;
  Relation relation;
  double rhs;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols, const SimplexOptions& opt)
      : m_(rows), cols_(cols), data_((rows + 1) * cols, 0.0), basis_(rows),
        opt_(opt) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& obj(std::size_t c) { return at(m_, c); }
  double& rhs(std::size_t r) { return at(r, cols_ - 1); }
  std::size_t rows() const { return m_; }
  std::size_t rhs_col() const { return cols_ - 1; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t iterations() const { return iterations_; }

  void pivot(std::size_t r, std::size_t c) {
    kernels::pivot(data_, m_ + 1, cols_, r, c, opt_.exec);
    basis_[r] = c;
    if (++iterations_ > opt_.max_iterations) {
      throw CycleDetected("simplex exceeded its iteration limit");
    }
  }

  // Subtracts multiples of each basic row so basic columns have zero
  // reduced cost.
  void canonicalize_objective() {
    for (std::size_t r = 0; r < m_; ++r) {
      const double f = obj(basis_[r]);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) obj(j) -= f * at(r, j);
      obj(basis_[r]) = 0.0;
    }
  }

  // Returns false when unbounded.
  bool optimize(std::size_t allowed_cols) {
    const double tol = opt_.tol;
    for (;;) {
      std::size_t enter = allowed_cols;
      double best = -tol;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        const double d = obj(j);
        if (d < best) {
          enter = j;
          if (opt_.rule == PivotRule::Bland) break;
          best = d;
        }
      }
      if (enter == allowed_cols) return true;

      std::size_t leave = m_;
      double ratio = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= tol) continue;
        const double q = std::max(rhs(r), 0.0) / a;
        if (leave == m_ || q < ratio - 1e-12) {
          ratio = q;
          leave = r;
        } else if (q <= ratio + 1e-12 && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  const SimplexOptions& opt_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, const SimplexOptions& options) {
  const std::size_t n = problem.num_vars;
  if (problem.objective.size() != n || problem.lower.size() != n ||
      problem.upper.size() != n) {
    throw DimensionMismatch("LpProblem vector sizes");
  }
  LpResult result;

  std::vector<VarMap> vars(n);
  std::size_t ny = 0;
  std::vector<std::pair<std::size_t, double>> box;  // (column, width)
  for (std::size_t j = 0; j < n; ++j) {
    const double l = problem.lower[j], u = problem.upper[j];
    if (l > u || l == kInfinity || u == -kInfinity) return result;
    if (std::isfinite(l)) {
      vars[j] = {l, {{ny, 1.0}}};
      if (std::isfinite(u)) box.emplace_back(ny, u - l);
      ++ny;
    } else if (std::isfinite(u)) {
      vars[j] = {u, {{ny, -1.0}}};
      ++ny;
    } else {
      vars[j] = {0.0, {{ny, 1.0}, {ny + 1, -1.0}}};
      ny += 2;
    }
  }

  std::vector<StdRow> rows;
  rows.reserve(problem.constraints.size() + box.size());
  for (const auto& con : problem.constraints) {
    if (con.coeffs.size() != n) throw DimensionMismatch("constraint width");
    StdRow row{std::vector<double>(ny, 0.0), con.relation, con.rhs};
    for (std::size_t j = 0; j < n; ++j) {
      const double c = con.coeffs[j];
      if (c == 0.0) continue;
      row.rhs -= c * vars[j].offset;
      for (auto [col, k] : vars[j].terms) row.a[col] += c * k;
    }
    rows.push_back(std::move(row));
  }
  for (auto [col, width] : box) {
    StdRow row{std::vector<double>(ny, 0.0), Relation::LessEqual, width};
    row.a[col] = 1.0;
    rows.push_back(std::move(row));
  }

  std::size_t n_slack = 0, n_art = 0;
  double bscale = 0.0;
  for (auto& row : rows) {
    if (row.rhs < 0.0) {
      for (auto& v : row.a) v = -v;
      row.rhs = -row.rhs;
      if (row.relation == Relation::LessEqual) {
        row.relation = Relation::GreaterEqual;
      } else if (row.relation == Relation::GreaterEqual) {
        row.relation = Relation::LessEqual;
      }
    }
    bscale = std::max(bscale, row.rhs);
    if (row.relation != Relation::Equal) ++n_slack;
    if (row.relation != Relation::LessEqual) ++n_art;
  }

  const std::size_t m = rows.size();
  const std::size_t slack0 = ny, art0 = ny + n_slack;
  const std::size_t cols = art0 + n_art + 1;
  Tableau tab(m, cols, options);
  std::size_t next_slack = slack0, next_art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < ny; ++j) tab.at(r, j) = rows[r].a[j];
    tab.rhs(r) = rows[r].rhs;
    switch (rows[r].relation) {
      case Relation::LessEqual:
        tab.at(r, next_slack) = 1.0;
        tab.basis()[r] = next_slack++;
        break;
      case Relation::GreaterEqual:
        tab.at(r, next_slack++) = -1.0;
        tab.at(r, next_art) = 1.0;
        tab.basis()[r] = next_art++;
        break;
      case Relation::Equal:
        tab.at(r, next_art) = 1.0;
        tab.basis()[r] = next_art++;
        break;
    }
  }

  if (n_art > 0) {
    for (std::size_t j = art0; j < art0 + n_art; ++j) tab.obj(j) = 1.0;
    tab.canonicalize_objective();
    tab.optimize(cols - 1);
    const double infeasibility = -tab.obj(tab.rhs_col());
    if (infeasibility > 1e-7 * (1.0 + bscale)) {
      result.iterations = tab.iterations();
      return result;
    }
    // Pivot zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and stay inert.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      std::size_t best = art0;
      double mag = 1e-9;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(tab.at(r, j)) > mag) {
          mag = std::abs(tab.at(r, j));
          best = j;
        }
      }
      if (best < art0) tab.pivot(r, best);
    }
  }

  // Phase 2 over the original objective.
  for (std::size_t j = 0; j < cols; ++j) tab.obj(j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double c = problem.objective[j];
    if (c == 0.0) continue;
    for (auto [col, k] : vars[j].terms) tab.obj(col) -= c * k;
  }
  tab.canonicalize_objective();
  const bool bounded = tab.optimize(art0);
  result.iterations = tab.iterations();
  if (!bounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  std::vector<double> y(ny, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const auto b = tab.basis()[r];
    if (b < ny) y[b] = std::max(tab.rhs(r), 0.0);
  }
  result.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double v = vars[j].offset;
    for (auto [col, k] : vars[j].terms) v += k * y[col];
    if (std::abs(v) < 1e-12) v = 0.0;
    result.x[j] = v;
  }
  result.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.value += problem.objective[j] * result.x[j];
  result.status = LpStatus::Optimal;
  return result;
}

void Polytope::add_row(std::span<const double> a, double rhs, bool equality) {
  A.append_row(a);
  b.push_back(rhs);
  equality_derived.push_back(equality);
}

Polytope build_consistency_polytope(const IntMatrix& S, const IntMatrix& T) {
  if (S.rows() != T.rows()) throw DimensionMismatch("polytope: row counts");
  const std::size_t ns = S.cols(), nt = T.cols(), dim = ns * nt;
  Polytope poly;
  poly.A = RealMatrix(0, dim);
  std::vector<double> a(dim);
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      std::fill(a.begin(), a.end(), 0.0);
      for (std::size_t s = 0; s < ns; ++s) a[s * nt + t] = static_cast<double>(S(i, s));
      const double rhs = static_cast<double>(T(i, t));
      poly.add_row(a, rhs, true);
      for (auto& v : a) v = -v;
      poly.add_row(a, -rhs, true);
    }
  }
  for (std::size_t k = 0; k < dim; ++k) {
    std::fill(a.begin(), a.end(), 0.0);
    a[k] = -1.0;
    poly.add_row(a, 0.0, false);
  }
  return poly;
}

Polytope build_consistency_polytope(const Dataset& d) {
  return build_consistency_polytope(d.S(), d.T());
}

bool is_feasible(const Polytope& poly, const SimplexOptions& options) {
  LpProblem lp(poly.dim());
  std::fill(lp.lower.begin(), lp.lower.end(), -kInfinity);
  for (std::size_t j = 0; j < poly.num_rows(); ++j) {
    auto row = poly.A.row(j);
    lp.add({row.begin(), row.end()}, Relation::LessEqual, poly.b[j]);
  }
  return solve_lp(lp, options).status == LpStatus::Optimal;
}

RealMatrix orthonormal_null_basis(const RealMatrix& rows, std::size_t dim) {
  const auto basis = to_real(null_space_basis(to_rational(rows)).B);
  const std::size_t d = basis.cols();
  RealMatrix N(dim, d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = basis(i, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev = 0; prev < k; ++prev) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += v[i] * N(i, prev);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * N(i, prev);
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) N(i, k) = v[i] / norm;
  }
  return N;
}

InteriorPoint relative_interior(const Polytope& poly,
                                const InteriorOptions& options) {
  const std::size_t dim = poly.dim(), m = poly.num_rows();
  const auto& opt = options.simplex;

  // Flagged rows j, j + 1 of the form (a, b), (-a, -b) can never both have
  // slack, so each such pair becomes one equality with xi fixed at 0.
  std::vector<bool> paired(m, false);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    if (!poly.equality_derived[j] || !poly.equality_derived[j + 1] || paired[j]) continue;
    if (poly.b[j] != -poly.b[j + 1]) continue;
    auto a = poly.A.row(j), a2 = poly.A.row(j + 1);
    bool opposite = true;
    for (std::size_t k = 0; k < dim && opposite; ++k) opposite = a[k] == -a2[k];
    if (opposite) paired[j] = paired[j + 1] = true;
  }
  // Slack-capable rows, in order; xi_j is column dim + slot[j].
  std::vector<std::size_t> free_rows, slot(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!paired[j]) {
      slot[j] = free_rows.size();
      free_rows.push_back(j);
    }
  }
  const std::size_t nf = free_rows.size();

  // Rows shared by all three LPs over [p | extra | alpha]: one equality per
  // pair, then a_j p - b_j alpha (+ xi_j) <= rhs(j) for the rest.
  auto add_rows = [&](LpProblem& lp, std::size_t alpha_col,
                      const std::function<void(std::size_t, std::vector<double>&, double&)>& free_row) {
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> row(lp.num_vars, 0.0);
      auto a = poly.A.row(j);
      std::copy(a.begin(), a.end(), row.begin());
      row[alpha_col] = -poly.b[j];
      if (paired[j]) {
        lp.add(std::move(row), Relation::Equal, 0.0);
        ++j;  // the partner row carries the same constraint
        continue;
      }
      double rhs = 0.0;
      free_row(j, row, rhs);
      lp.add(std::move(row), Relation::LessEqual, rhs);
    }
  };

  // [p (free) | xi in [0,1] | alpha >= 1]
  LpProblem lp1(dim + nf + 1);
  for (std::size_t k = 0; k < dim; ++k) lp1.lower[k] = -kInfinity;
  for (std::size_t f = 0; f < nf; ++f) {
    lp1.upper[dim + f] = 1.0;
    lp1.objective[dim + f] = 1.0;
  }
  lp1.lower[dim + nf] = 1.0;
  add_rows(lp1, dim + nf, [&](std::size_t j, std::vector<double>& row, double&) {
    row[dim + slot[j]] = 1.0;
  });
  const auto r1 = solve_lp(lp1, opt);
  if (r1.status != LpStatus::Optimal) {
    throw InfeasiblePolytope("relative_interior: polytope is empty");
  }

  InteriorPoint ip;
  ip.xi_star.assign(m, 0.0);
  std::vector<bool> active(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    const double xi = paired[j] ? 0.0 : r1.x[dim + slot[j]];
    ip.xi_star[j] = xi;
    if (xi <= options.tau_class) {
      active[j] = true;
      ip.always_active.push_back(j);
    } else if (xi < 1.0 - options.tau_class) {
      throw NumericalAmbiguity("relative_interior: slack variable " +
                               std::to_string(j) + " is neither 0 nor 1");
    }
  }

  auto constrained_rows = [&](std::size_t extra) {
    LpProblem lp(dim + extra + 1);
    for (std::size_t k = 0; k < dim; ++k) lp.lower[k] = -kInfinity;
    lp.lower[dim + extra] = 1.0;
    add_rows(lp, dim + extra, [&](std::size_t j, std::vector<double>&, double& rhs) {
      rhs = active[j] ? 0.0 : -1.0;
    });
    return lp;
  };

  // Least alpha keeping every slack-capable row at least 1/alpha from its
  // bound.
  auto lp2 = constrained_rows(0);
  lp2.objective[dim] = -1.0;
  const auto r2 = solve_lp(lp2, opt);
  if (r2.status != LpStatus::Optimal) {
    throw NumericalAmbiguity("relative_interior: alpha re-solve failed");
  }

  // Among those, least l1 norm: [p | t >= |p| | alpha].
  auto lp3 = constrained_rows(dim);
  const double alpha2 = r2.x[dim];
  lp3.upper[2 * dim] = alpha2 * (1.0 + 1e-9) + 1e-12;
  for (std::size_t k = 0; k < dim; ++k) {
    lp3.objective[dim + k] = -1.0;
    std::vector<double> row(2 * dim + 1, 0.0);
    row[k] = 1.0;
    row[dim + k] = -1.0;
    lp3.add(row, Relation::LessEqual, 0.0);
    row[k] = -1.0;
    lp3.add(std::move(row), Relation::LessEqual, 0.0);
  }
  const auto r3 = solve_lp(lp3, opt);
  if (r3.status != LpStatus::Optimal) {
    throw NumericalAmbiguity("relative_interior: norm re-solve failed");
  }

  ip.alpha_star = r3.x[2 * dim];
  ip.p1.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    double v = r3.x[k] / ip.alpha_star;
    if (std::abs(v) < 1e-12) v = 0.0;
    ip.p1[k] = v;
  }

  RealMatrix A0(0, dim);
  for (auto j : ip.always_active) A0.append_row(poly.A.row(j));
  ip.N = orthonormal_null_basis(A0, dim);

  double max_norm = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (active[j]) continue;
    double sq = 0.0;
    for (double a : poly.A.row(j)) sq += a * a;
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  if (max_norm > 0.0) {
    ip.radius = 1.0 / (ip.alpha_star * max_norm);
  } else {
    ip.radius = ip.dimension() > 0 ? 1.0 : 0.0;
  }
  return ip;
}

std::vector<double> sample_unit_ball(std::size_t d, std::mt19937_64& rng) {
  std::vector<double> v(d);
  if (d == 0) return v;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  const double scale = std::pow(unif(rng), 1.0 / static_cast<double>(d)) / norm;
  for (auto& x : v) x *= scale;
  return v;
}

std::vector<double> sample_second_point(const InteriorPoint& ip,
                                        std::mt19937_64& rng) {
  const auto v = sample_unit_ball(ip.dimension(), rng);
  std::vector<double> p2 = ip.p1;
  for (std::size_t i = 0; i < p2.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) acc += ip.N(i, k) * v[k];
    p2[i] += ip.radius * acc;
  }
  return p2;
}

}  // namespace unanimous
