#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/lp.hpp"

namespace fixtures {

using namespace unanimous;

inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline Vocabulary running_sources() {
  return Vocabulary({"area", "of", "Ohio", "cities", "in", "Iowa"});
}
inline Vocabulary running_targets() { return Vocabulary({"area", "city", "OH", "IA"}); }

inline Dataset from_pairs(const std::vector<std::pair<std::string, std::string>>& rows,
                          Vocabulary src, Vocabulary tgt) {
  DatasetBuilder b(std::move(src), std::move(tgt));
  for (const auto& [x, y] : rows) b.add(words(x), words(y));
  return b.build();
}

// Three training pairs: area of Iowa, cities in Ohio, cities in Iowa.
inline Dataset running_example() {
  return from_pairs({{"area of Iowa", "area IA"},
                     {"cities in Ohio", "city OH"},
                     {"cities in Iowa", "city IA"}},
                    running_sources(), running_targets());
}

// The running example plus "area of Ohio cities in".
inline Dataset running_example_extended() {
  return from_pairs({{"area of Iowa", "area IA"},
                     {"cities in Ohio", "city OH"},
                     {"cities in Iowa", "city IA"},
                     {"area of Ohio cities in", "area city OH"}},
                    running_sources(), running_targets());
}

inline CountVector query(const std::string& text, const Vocabulary& vocab) {
  return bag_for_query(words(text), vocab);
}

inline CountVector bag(const std::string& text, const Vocabulary& vocab) {
  return bag_from_tokens(words(text), vocab);
}

// Random non-negative instance with S entries in [0, 2]; T = S M_true.
struct Instance {
  Dataset data;
  IntMatrix M_true;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t ns, std::size_t nt,
                                std::size_t n, std::int64_t entry_bound = 2) {
  std::uniform_int_distribution<std::int64_t> sv(0, 2), mv(0, entry_bound);
  std::vector<std::string> src, tgt;
  for (std::size_t s = 0; s < ns; ++s) src.push_back("s" + std::to_string(s));
  for (std::size_t t = 0; t < nt; ++t) tgt.push_back("t" + std::to_string(t));
  IntMatrix M(ns, nt), S(n, ns), T(n, nt);
  for (auto& v : M.data()) v = mv(rng);
  for (auto& v : S.data()) v = sv(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t s = 0; s < ns; ++s) T(i, t) += S(i, s) * M(s, t);
    }
  }
  return {Dataset(Vocabulary(src), Vocabulary(tgt), S, T), M};
}

inline CountVector random_bag(std::mt19937_64& rng, std::size_t ns, std::int64_t hi = 2) {
  std::uniform_int_distribution<std::int64_t> v(0, hi);
  CountVector x(ns);
  for (auto& c : x.counts) c = v(rng);
  return x;
}

inline std::int64_t l1_residual(const Dataset& d, const IntMatrix& M) {
  std::int64_t r = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t t = 0; t < d.num_target(); ++t) {
      std::int64_t y = 0;
      for (std::size_t s = 0; s < d.num_source(); ++s) y += d.S()(i, s) * M(s, t);
      r += std::abs(y - d.T()(i, t));
    }
  }
  return r;
}

inline CountVector apply(const IntMatrix& M, const CountVector& x) {
  CountVector y(M.cols());
  for (std::size_t s = 0; s < M.rows(); ++s) {
    for (std::size_t t = 0; t < M.cols(); ++t) y.counts[t] += x[s] * M(s, t);
  }
  return y;
}

// Brute force over every integral M in a box, independent of the library's
// enumerator. Entries of atoms no input uses stay 0.
struct BruteForce {
  std::vector<IntMatrix> consistent;
  std::vector<bool> seen;
  bool complete = true;  // false when the box exceeded the cap
};

inline BruteForce brute_force(const Dataset& d, std::int64_t budget,
                              double cap = 2e6, bool loose = false) {
  const std::size_t ns = d.num_source(), nt = d.num_target();
  BruteForce out;
  out.seen.assign(ns, false);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t s = 0; s < ns; ++s) out.seen[s] = out.seen[s] || d.S()(i, s) > 0;
  }
  // Row i alone forces S_is M_st <= T_it + budget. `loose` uses the weaker
  // max T + budget for every cell instead.
  std::int64_t top = budget;
  for (auto v : d.T().data()) top = std::max(top, v + budget);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<std::int64_t> tops;
  double size = 1.0;
  for (std::size_t s = 0; s < ns; ++s) {
    if (!out.seen[s]) continue;
    for (std::size_t t = 0; t < nt; ++t) {
      std::int64_t u = top;
      for (std::size_t i = 0; i < d.size() && !loose; ++i) {
        if (d.S()(i, s) > 0) u = std::min(u, (d.T()(i, t) + budget) / d.S()(i, s));
      }
      cells.emplace_back(s, t);
      tops.push_back(u);
      size *= static_cast<double>(u + 1);
    }
  }
  if (size > cap) {
    out.complete = false;
    return out;
  }
  IntMatrix M(ns, nt);
  for (;;) {
    if (l1_residual(d, M) <= budget) out.consistent.push_back(M);
    std::size_t c = 0;
    while (c < cells.size() && M(cells[c].first, cells[c].second) == tops[c]) {
      M(cells[c].first, cells[c].second) = 0;
      ++c;
    }
    if (c == cells.size()) break;
    ++M(cells[c].first, cells[c].second);
  }
  return out;
}

// Verdict of unanimity over an explicit mapping set.
inline std::optional<CountVector> brute_verdict(const BruteForce& bf, const CountVector& x) {
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] > 0 && (s >= bf.seen.size() || !bf.seen[s])) return std::nullopt;
  }
  std::set<CountVector> outs;
  for (const auto& M : bf.consistent) outs.insert(apply(M, x.resized(M.rows())));
  if (outs.size() != 1) return std::nullopt;
  return *outs.begin();
}

// Per-coordinate min and max of (x M)_t over the real consistent set
// {M >= 0 : SM = T}, one LP each. Unseen atoms abstain.
inline std::optional<CountVector> lp_oracle(const Dataset& d, const CountVector& x,
                                            bool* unanimous_but_fractional = nullptr) {
  const std::size_t ns = d.num_source(), nt = d.num_target();
  const auto seen = d.seen_sources();
  if (unanimous_but_fractional) *unanimous_but_fractional = false;
  if (has_unseen_atom(x, seen)) return std::nullopt;
  const auto xr = x.resized(ns);
  CountVector y(nt);
  bool fractional = false;
  for (std::size_t t = 0; t < nt; ++t) {
    LpProblem p(ns * nt);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t u = 0; u < nt; ++u) {
        std::vector<double> row(ns * nt, 0.0);
        for (std::size_t s = 0; s < ns; ++s) row[s * nt + u] = static_cast<double>(d.S()(i, s));
        p.add(std::move(row), Relation::Equal, static_cast<double>(d.T()(i, u)));
      }
    }
    for (std::size_t s = 0; s < ns; ++s) p.objective[s * nt + t] = static_cast<double>(xr[s]);
    const auto hi = solve_lp(p);
    for (auto& c : p.objective) c = -c;
    const auto lo = solve_lp(p);
    if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) return std::nullopt;
    if (std::abs(hi.value + lo.value) > 1e-6) return std::nullopt;
    const double r = std::round(hi.value);
    if (std::abs(r - hi.value) > 1e-4 || r < 0) fractional = true;
    y.counts[t] = static_cast<std::int64_t>(r);
  }
  if (fractional) {
    if (unanimous_but_fractional) *unanimous_but_fractional = true;
    return std::nullopt;
  }
  return y;
}

}  // namespace fixtures
