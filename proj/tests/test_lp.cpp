#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "unanimous/data.hpp"
#include "unanimous/lp.hpp"
#include "unanimous/unanimity.hpp"

using namespace unanimous;

namespace {

// Pentagon-style instance over (x, y, z): z <= 0, -z <= 0, -x <= 0,
// -y <= 0, x + y <= 6.
Polytope triangle() {
  Polytope p;
  p.add_row(std::vector<double>{0, 0, 1}, 0, true);
  p.add_row(std::vector<double>{0, 0, -1}, 0, true);
  p.add_row(std::vector<double>{-1, 0, 0}, 0, false);
  p.add_row(std::vector<double>{0, -1, 0}, 0, false);
  p.add_row(std::vector<double>{1, 1, 0}, 6, false);
  return p;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool satisfies(const LpProblem& p, const std::vector<double>& x, double tol = 1e-9) {
  for (std::size_t j = 0; j < p.num_vars; ++j) {
    if (x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol) return false;
  }
  for (const auto& c : p.constraints) {
    const double lhs = dot(c.coeffs, x);
    switch (c.relation) {
      case Relation::LessEqual:
        if (lhs > c.rhs + tol) return false;
        break;
      case Relation::GreaterEqual:
        if (lhs < c.rhs - tol) return false;
        break;
      case Relation::Equal:
        if (std::abs(lhs - c.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("textbook LPs") {
  LpProblem p(2);
  p.objective = {1, 1};
  p.add({1, 0}, Relation::LessEqual, 1);
  p.add({0, 1}, Relation::LessEqual, 1);
  const auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(2));
  CHECK(r.x[0] == doctest::Approx(1));
  CHECK(r.x[1] == doctest::Approx(1));

  LpProblem q(1);
  q.objective = {1};
  q.add({1}, Relation::GreaterEqual, 1);
  q.add({1}, Relation::LessEqual, 0);
  CHECK(solve_lp(q).status == LpStatus::Infeasible);

  LpProblem u(2);
  u.objective = {1, 0};
  u.add({1, -1}, Relation::LessEqual, 1);
  CHECK(solve_lp(u).status == LpStatus::Unbounded);

  LpProblem e(2);
  e.objective = {-1, -2};
  e.add({1, 1}, Relation::Equal, 3);
  const auto re = solve_lp(e);
  REQUIRE(re.status == LpStatus::Optimal);
  CHECK(re.value == doctest::Approx(-3));
  CHECK(re.x[0] == doctest::Approx(3));
}

TEST_CASE("free and bounded variables") {
  LpProblem p(2);
  p.lower = {-kInfinity, -2};
  p.upper = {kInfinity, 5};
  p.objective = {-1, 1};
  p.add({1, 0}, Relation::GreaterEqual, -7);
  const auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(-7));
  CHECK(r.x[1] == doctest::Approx(5));
  CHECK(r.value == doctest::Approx(12));
}

TEST_CASE("strong duality on random LPs") {
  // max c.x, Ax <= b, x >= 0 against min b.y, A^T y >= c, y >= 0.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> a(0, 4), c(-2, 5), b(1, 9);
  int optimal = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 2 + trial % 4, m = 1 + trial % 5;
    LpProblem primal(n), dual(m);
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    for (auto& row : A) {
      for (auto& v : row) v = a(rng);
    }
    for (std::size_t j = 0; j < n; ++j) primal.objective[j] = c(rng);
    std::vector<double> rhs(m);
    for (auto& v : rhs) v = b(rng);
    for (std::size_t i = 0; i < m; ++i) primal.add(A[i], Relation::LessEqual, rhs[i]);
    for (std::size_t i = 0; i < m; ++i) dual.objective[i] = -rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> col(m);
      for (std::size_t i = 0; i < m; ++i) col[i] = A[i][j];
      dual.add(col, Relation::GreaterEqual, primal.objective[j]);
    }
    const auto rp = solve_lp(primal), rd = solve_lp(dual);
    if (rp.status == LpStatus::Optimal) {
      ++optimal;
      REQUIRE(rd.status == LpStatus::Optimal);
      CHECK(rp.value == doctest::Approx(-rd.value));
      CHECK(satisfies(primal, rp.x));
      CHECK(satisfies(dual, rd.x));
      CHECK(dot(primal.objective, rp.x) == doctest::Approx(rp.value));
    } else {
      CHECK(rp.status == LpStatus::Unbounded);
      CHECK(rd.status == LpStatus::Infeasible);
    }
  }
  CHECK(optimal > 20);
}

TEST_CASE("Dantzig and Bland reach the same optimum value") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> a(0, 3), c(0, 4), b(2, 8);
  for (int trial = 0; trial < 40; ++trial) {
    LpProblem p(3);
    for (auto& v : p.objective) v = c(rng);
    for (int i = 0; i < 3; ++i) {
      p.add({double(a(rng)), double(a(rng)), double(a(rng)) + 1}, Relation::LessEqual, b(rng));
    }
    p.add({1, 1, 1}, Relation::LessEqual, 10);
    SimplexOptions d;
    d.rule = PivotRule::Dantzig;
    const auto x = solve_lp(p), y = solve_lp(p, d);
    REQUIRE(x.status == LpStatus::Optimal);
    REQUIRE(y.status == LpStatus::Optimal);
    CHECK(x.value == doctest::Approx(y.value));
  }
}

TEST_CASE("slack LP of the triangle instance") {
  // max sum xi s.t. A p + xi <= alpha b, 0 <= xi <= 1, alpha >= 1.
  const auto poly = triangle();
  LpProblem p(3 + 5 + 1);
  p.lower = {-kInfinity, -kInfinity, -kInfinity, 0, 0, 0, 0, 0, 1};
  p.upper = {kInfinity, kInfinity, kInfinity, 1, 1, 1, 1, 1, kInfinity};
  for (std::size_t j = 3; j < 8; ++j) p.objective[j] = 1;
  for (std::size_t j = 0; j < 5; ++j) {
    std::vector<double> row(9, 0.0);
    for (std::size_t k = 0; k < 3; ++k) row[k] = poly.A(j, k);
    row[3 + j] = 1;
    row[8] = -poly.b[j];
    p.add(row, Relation::LessEqual, 0);
  }
  const auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(3));
  CHECK(r.x[3] == doctest::Approx(0));
  CHECK(r.x[4] == doctest::Approx(0));
  for (std::size_t j = 5; j < 8; ++j) CHECK(r.x[j] == doctest::Approx(1));
}

TEST_CASE("relative interior of the triangle instance") {
  const auto ip = relative_interior(triangle());
  REQUIRE(ip.p1.size() == 3);
  CHECK(std::abs(ip.p1[0] - 1) < 1e-6);
  CHECK(std::abs(ip.p1[1] - 1) < 1e-6);
  CHECK(std::abs(ip.p1[2]) < 1e-6);
  CHECK(std::abs(ip.radius - 1 / std::sqrt(2.0)) < 1e-6);
  CHECK(ip.alpha_star == doctest::Approx(1));
  CHECK(ip.always_active == std::vector<std::size_t>{0, 1});
  CHECK(ip.dimension() == 2);
  for (std::size_t j = 0; j < 5; ++j) CHECK(ip.xi_star[j] == doctest::Approx(j < 2 ? 0 : 1));
  // N has orthonormal columns orthogonal to z.
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(std::abs(ip.N(2, a)) < 1e-12);
    for (std::size_t b = 0; b < 2; ++b) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += ip.N(k, a) * ip.N(k, b);
      CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-9);
    }
  }
}

TEST_CASE("second points of the triangle instance stay in the triangle") {
  const auto ip = relative_interior(triangle());
  std::mt19937_64 rng(1);
  for (int k = 0; k < 500; ++k) {
    const auto p2 = sample_second_point(ip, rng);
    CHECK(std::abs(p2[2]) < 1e-12);
    CHECK(p2[0] > 0);
    CHECK(p2[1] > 0);
    CHECK(p2[0] + p2[1] < 6);
  }
}

TEST_CASE("always-active rows admit no slack") {
  const auto poly = triangle();
  const auto ip = relative_interior(poly);
  for (std::size_t j : ip.always_active) {
    // max s s.t. A p <= b, a_j p + s <= b_j.
    LpProblem p(4);
    p.lower = {-kInfinity, -kInfinity, -kInfinity, 0};
    p.objective = {0, 0, 0, 1};
    for (std::size_t r = 0; r < poly.num_rows(); ++r) {
      std::vector<double> row{poly.A(r, 0), poly.A(r, 1), poly.A(r, 2), r == j ? 1.0 : 0.0};
      p.add(row, Relation::LessEqual, poly.b[r]);
    }
    const auto r = solve_lp(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(std::abs(r.value) < 1e-9);
  }
}

TEST_CASE("single-point polytope") {
  Polytope p;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> e(2, 0.0);
    e[k] = 1;
    p.add_row(e, 3.0 + k, true);
    e[k] = -1;
    p.add_row(e, -3.0 - k, true);
  }
  const auto ip = relative_interior(p);
  CHECK(ip.dimension() == 0);
  CHECK(ip.p1[0] == doctest::Approx(3));
  CHECK(ip.p1[1] == doctest::Approx(4));
  std::mt19937_64 rng(0);
  CHECK(sample_second_point(ip, rng) == ip.p1);
}

TEST_CASE("consistency polytope counts") {
  const auto d = fixtures::running_example();
  const auto poly = build_consistency_polytope(d);
  CHECK(poly.dim() == 24);
  std::size_t eq = 0, nonneg = 0;
  for (std::size_t j = 0; j < poly.num_rows(); ++j) {
    if (poly.equality_derived[j]) {
      ++eq;
    } else {
      ++nonneg;
    }
  }
  CHECK(eq == 24);
  CHECK(nonneg == 24);
  CHECK(is_feasible(poly));

  const auto empty = build_consistency_polytope(IntMatrix(0, 6), IntMatrix(0, 4));
  CHECK(empty.num_rows() == 24);
  for (bool e : empty.equality_derived) CHECK_FALSE(e);
  CHECK(is_feasible(empty));
}

TEST_CASE("conflicting outputs give an infeasible polytope") {
  const auto d = fixtures::from_pairs({{"Iowa", "IA"}, {"Iowa", "OH"}},
                                      fixtures::running_sources(), fixtures::running_targets());
  const auto poly = build_consistency_polytope(d);
  CHECK_FALSE(is_feasible(poly));
  CHECK_THROWS_AS(relative_interior(poly), InfeasiblePolytope);
}

TEST_CASE("interior point support matches the integral mappings") {
  const auto d = fixtures::running_example();
  const auto ip = relative_interior(build_consistency_polytope(d));
  const auto bf = fixtures::brute_force(d, 0);
  REQUIRE(bf.complete);
  REQUIRE(bf.consistent.size() == 4);
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t t = 0; t < 4; ++t) {
      bool somewhere = false;
      for (const auto& M : bf.consistent) somewhere = somewhere || M(s, t) > 0;
      CHECK_MESSAGE((ip.p1[s * 4 + t] > 1e-7) == somewhere, "entry " << s << "," << t);
    }
  }
  CHECK(ip.radius > 0);
}

TEST_CASE("second points satisfy the consistency constraints") {
  const auto d = fixtures::running_example();
  const auto ip = relative_interior(build_consistency_polytope(d));
  std::mt19937_64 rng(42);
  for (int k = 0; k < 1000; ++k) {
    const auto p2 = sample_second_point(ip, rng);
    for (double v : p2) CHECK(v >= -1e-9);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t t = 0; t < 4; ++t) {
        double y = 0;
        for (std::size_t s = 0; s < 6; ++s) y += d.S()(i, s) * p2[s * 4 + t];
        CHECK(std::abs(y - d.T()(i, t)) < 1e-9);
      }
    }
  }
}

TEST_CASE("unit ball sampling") {
  std::mt19937_64 rng(3);
  const std::size_t d = 4;
  std::vector<double> mean(d, 0.0);
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const auto v = sample_unit_ball(d, rng);
    REQUIRE(v.size() == d);
    CHECK(dot(v, v) <= 1 + 1e-12);
    for (std::size_t j = 0; j < d; ++j) mean[j] += v[j] / n;
  }
  for (double m : mean) CHECK(std::abs(m) < 0.05);
  CHECK(sample_unit_ball(0, rng).empty());

  std::mt19937_64 a(7), b(7);
  CHECK(sample_unit_ball(3, a) == sample_unit_ball(3, b));
}

TEST_CASE("orthonormal null basis") {
  RealMatrix rows(1, 3);
  rows(0, 0) = 1;
  rows(0, 1) = 1;
  const auto N = orthonormal_null_basis(rows, 3);
  REQUIRE(N.cols() == 2);
  for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(N(0, c) + N(1, c)) < 1e-12);
  CHECK(orthonormal_null_basis(RealMatrix(0, 3), 3).cols() == 3);
}

TEST_CASE("LP training on long, dense synthetic inputs") {
  SynthConfig cfg;
  cfg.n_source = 150;
  cfg.n_target = 40;
  cfg.n_train = 300;
  cfg.n_clusters = 5;
  cfg.len_max = 30;
  const auto data = synth_generate(cfg);
  const auto dec = Decider::train(data.train, Mode::Lp, 0, 1);
  const auto& M1 = dec.mappings().M1;
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    for (std::size_t t = 0; t < cfg.n_target; ++t) {
      double y = 0.0;
      for (std::size_t s = 0; s < cfg.n_source; ++s) y += data.train.S()(i, s) * M1(s, t);
      CHECK(std::abs(y - data.train.T()(i, t)) < 1e-6);
    }
  }
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    CHECK(dec.predict(data.train.input(i)) == Prediction::answer(data.train.output(i)));
  }
}
