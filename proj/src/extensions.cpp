#include "unanimous/extensions.hpp"

#include <cmath>
#include <map>
#include <random>

namespace unanimous {

RationalVector ActiveState::reduce(const CountVector& x) const {
  RationalVector v(dim_);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 0) continue;
    if (j >= dim_) throw DimensionMismatch("active learning: input wider than state");
    v[j] = static_cast<long>(x[j]);
  }
  Rational tmp;
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const Rational f = v[pivots_[k]];
    if (sgn(f) == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (sgn(rows_[k][j]) == 0) continue;
      tmp = f * rows_[k][j];
      v[j] -= tmp;
    }
  }
  return v;
}

bool ActiveState::in_span(const CountVector& x) const {
  for (const auto& q : reduce(x)) {
    if (sgn(q) != 0) return false;
  }
  return true;
}

bool ActiveState::offer(std::size_t index, const CountVector& x) {
  auto v = reduce(x);
  std::size_t p = 0;
  while (p < dim_ && sgn(v[p]) == 0) ++p;
  if (p == dim_) return false;
  const Rational lead = v[p];
  for (auto& q : v) q /= lead;
  Rational tmp;
  for (auto& row : rows_) {
    const Rational f = row[p];
    if (sgn(f) == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j) {
      tmp = f * v[j];
      row[j] -= tmp;
    }
  }
  std::size_t at = 0;
  while (at < pivots_.size() && pivots_[at] < p) ++at;
  rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), std::move(v));
  pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(at), p);
  queried_.push_back(index);
  return true;
}

RationalMatrix ActiveState::basis() const {
  RationalMatrix m(0, dim_);
  for (const auto& row : rows_) m.append_row(row);
  return m;
}

ActiveSelection active_select(std::span<const CountVector> inputs) {
  std::size_t dim = 0;
  for (const auto& x : inputs) dim = std::max(dim, x.size());
  ActiveSelection out{{}, ActiveState(dim)};
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (out.state.offer(i, inputs[i])) out.queries.push_back(i);
  }
  return out;
}

std::optional<RationalVector> ls_output(const Decider& dec, const CountVector& x) {
  const auto alpha = dec.coefficients(x);
  if (!alpha) return std::nullopt;
  const auto& T = dec.dataset().T();
  RationalVector y(T.cols());
  Rational tmp;
  for (std::size_t i = 0; i < T.rows(); ++i) {
    if (sgn((*alpha)[i]) == 0) continue;
    for (std::size_t t = 0; t < T.cols(); ++t) {
      if (T(i, t) == 0) continue;
      tmp = (*alpha)[i] * static_cast<long>(T(i, t));
      y[t] += tmp;
    }
  }
  return y;
}

bool are_paraphrases(const CountVector& x, const CountVector& x2, const Decider& dec) {
  const auto a = ls_output(dec, x);
  if (!a) throw NotSafe(0, "first input is outside the LS safe set");
  const auto b = ls_output(dec, x2);
  if (!b) throw NotSafe(1, "second input is outside the LS safe set");
  return *a == *b;
}

ParaphrasePartition paraphrase_classes(std::span<const CountVector> pool,
                                       const Decider& dec) {
  ParaphrasePartition out;
  std::map<RationalVector, std::size_t> index;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto y = ls_output(dec, pool[i]);
    if (!y) {
      out.unsafe.push_back(i);
      continue;
    }
    auto [it, fresh] = index.emplace(*y, out.classes.size());
    if (fresh) out.classes.push_back({std::move(*y), {}});
    out.classes[it->second].members.push_back(i);
  }
  return out;
}

Prediction predict_with_denotations(const DenotationData& data, const CountVector& x,
                                    Relaxation relaxation, std::uint64_t seed,
                                    const IlpOptions& options) {
  const std::size_t ns = data.source_vocab.size(), nt = data.target_vocab.size();
  const auto cs = build_denotation_consistency(data, relaxation);
  if (solve_ilp(cs.problem, options).status != LpStatus::Optimal) {
    throw InfeasibleData("no mapping and candidate choice fits every example");
  }

  std::vector<bool> seen(ns, false);
  for (const auto& ex : data.examples) {
    for (std::size_t s = 0; s < ns; ++s) seen[s] = seen[s] || ex.input[s] > 0;
  }
  if (has_unseen_atom(x, seen)) return Prediction::abstain(AbstainReason::UnseenAtom);
  const auto xr = x.resized(ns);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(nt);
  for (auto& c : v) c = gauss(rng);
  const auto proj = minmax_projection(cs, xr, v, options);
  if (!proj) throw InfeasibleData("no mapping and candidate choice fits every example");
  if (!projections_agree(proj->min, proj->max)) {
    return Prediction::abstain(AbstainReason::NotUnanimous);
  }

  CountVector y(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    double acc = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (xr[s] != 0) acc += static_cast<double>(xr[s]) * proj->argmin[s * nt + t];
    }
    const double r = std::round(acc);
    if (std::abs(r - acc) > 1e-4 || r < 0.0) {
      return Prediction::abstain(AbstainReason::NonIntegralOutput);
    }
    y.counts[t] = static_cast<std::int64_t>(r);
  }
  return Prediction::answer(std::move(y));
}

}  // namespace unanimous
