#include "unanimous/core.hpp"

#include <algorithm>
#include <numeric>

namespace unanimous {

Vocabulary::Vocabulary(std::vector<std::string> atoms) {
  for (auto& a : atoms) {
    if (index_.count(a)) throw FormatError("duplicate atom in vocabulary: " + a);
    index_.emplace(a, atoms_.size());
    atoms_.push_back(std::move(a));
  }
}

std::optional<std::size_t> Vocabulary::find(const std::string& atom) const {
  auto it = index_.find(atom);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::add(const std::string& atom) {
  auto [it, inserted] = index_.emplace(atom, atoms_.size());
  if (inserted) atoms_.push_back(atom);
  return it->second;
}

CountVector::CountVector(std::vector<std::int64_t> c) : counts(std::move(c)) {
  for (auto v : counts) {
    if (v < 0) throw DimensionMismatch("negative count in bag");
  }
}

std::int64_t CountVector::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

bool CountVector::is_zero() const {
  return std::all_of(counts.begin(), counts.end(),
                     [](std::int64_t v) { return v == 0; });
}

CountVector CountVector::resized(std::size_t n) const {
  CountVector out(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i < n) {
      out.counts[i] = counts[i];
    } else if (counts[i] != 0) {
      throw DimensionMismatch("cannot truncate a non-zero count");
    }
  }
  return out;
}

CountVector bag_from_tokens(std::span<const std::string> tokens,
                            Vocabulary& vocab, UnseenPolicy policy) {
  std::vector<std::size_t> positions;
  positions.reserve(tokens.size());
  for (const auto& tok : tokens) {
    auto pos = vocab.find(tok);
    if (!pos) {
      if (policy == UnseenPolicy::Reject) throw UnseenAtomError(tok);
      pos = vocab.add(tok);
    }
    positions.push_back(*pos);
  }
  CountVector bag(vocab.size());
  for (auto p : positions) ++bag.counts[p];
  return bag;
}

CountVector bag_from_tokens(std::span<const std::string> tokens,
                            const Vocabulary& vocab) {
  CountVector bag(vocab.size());
  for (const auto& tok : tokens) {
    auto pos = vocab.find(tok);
    if (!pos) throw UnseenAtomError(tok);
    ++bag.counts[*pos];
  }
  return bag;
}

CountVector bag_for_query(std::span<const std::string> tokens,
                          const Vocabulary& vocab) {
  Vocabulary extended = vocab;
  return bag_from_tokens(tokens, extended, UnseenPolicy::Extend);
}

std::vector<std::string> tokens_from_bag(const CountVector& bag,
                                         const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bag.size(); ++i) {
    for (std::int64_t k = 0; k < bag[i]; ++k) out.push_back(vocab.at(i));
  }
  return out;
}

Dataset::Dataset(Vocabulary source_vocab, Vocabulary target_vocab, IntMatrix S,
                 IntMatrix T)
    : source_vocab_(std::move(source_vocab)),
      target_vocab_(std::move(target_vocab)),
      S_(std::move(S)),
      T_(std::move(T)) {
  if (S_.rows() == 0 && S_.cols() == 0) S_ = IntMatrix(0, source_vocab_.size());
  if (T_.rows() == 0 && T_.cols() == 0) T_ = IntMatrix(0, target_vocab_.size());
  if (S_.rows() != T_.rows()) throw DimensionMismatch("S and T row counts differ");
  if (S_.cols() != source_vocab_.size() || T_.cols() != target_vocab_.size()) {
    throw DimensionMismatch("matrix width disagrees with vocabulary");
  }
  auto negative = [](std::int64_t v) { return v < 0; };
  if (std::any_of(S_.data().begin(), S_.data().end(), negative) ||
      std::any_of(T_.data().begin(), T_.data().end(), negative)) {
    throw DimensionMismatch("negative count in dataset");
  }
}

CountVector Dataset::input(std::size_t i) const {
  auto r = S_.row(i);
  return CountVector(std::vector<std::int64_t>(r.begin(), r.end()));
}

CountVector Dataset::output(std::size_t i) const {
  auto r = T_.row(i);
  return CountVector(std::vector<std::int64_t>(r.begin(), r.end()));
}

std::vector<Example> Dataset::examples() const {
  std::vector<Example> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(example(i));
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  IntMatrix S(0, num_source()), T(0, num_target());
  for (auto r : rows) {
    S.append_row(S_.row(r));
    T.append_row(T_.row(r));
  }
  return Dataset(source_vocab_, target_vocab_, std::move(S), std::move(T));
}

Dataset Dataset::without(std::size_t row) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i != row) keep.push_back(i);
  }
  return subset(keep);
}

Dataset Dataset::with_outputs(IntMatrix T) const {
  return Dataset(source_vocab_, target_vocab_, S_, std::move(T));
}

std::vector<bool> Dataset::seen_sources() const {
  std::vector<bool> seen(num_source(), false);
  for (std::size_t i = 0; i < S_.rows(); ++i) {
    for (std::size_t s = 0; s < S_.cols(); ++s) {
      if (S_(i, s) > 0) seen[s] = true;
    }
  }
  return seen;
}

Dataset dataset_matrices(std::span<const Example> examples,
                         Vocabulary source_vocab, Vocabulary target_vocab) {
  IntMatrix S(0, source_vocab.size()), T(0, target_vocab.size());
  for (const auto& ex : examples) {
    if (ex.input.size() != source_vocab.size() ||
        ex.output.size() != target_vocab.size()) {
      throw DimensionMismatch("example vector length disagrees with vocabulary");
    }
    S.append_row(ex.input.counts);
    T.append_row(ex.output.counts);
  }
  return Dataset(std::move(source_vocab), std::move(target_vocab), std::move(S),
                 std::move(T));
}

void DatasetBuilder::add(std::span<const std::string> source,
                         std::span<const std::string> target) {
  auto x = bag_from_tokens(source, source_vocab_, UnseenPolicy::Extend);
  auto y = bag_from_tokens(target, target_vocab_, UnseenPolicy::Extend);
  examples_.push_back({std::move(x), std::move(y)});
}

Dataset DatasetBuilder::build() const {
  std::vector<Example> padded;
  padded.reserve(examples_.size());
  for (const auto& ex : examples_) {
    padded.push_back({ex.input.resized(source_vocab_.size()),
                      ex.output.resized(target_vocab_.size())});
  }
  return dataset_matrices(padded, source_vocab_, target_vocab_);
}

const char* to_string(AbstainReason reason) {
  switch (reason) {
    case AbstainReason::NotUnanimous:
      return "NotUnanimous";
    case AbstainReason::UnseenAtom:
      return "UnseenAtom";
    case AbstainReason::NonIntegralOutput:
      return "NonIntegralOutput";
    case AbstainReason::InfeasibleModel:
      return "InfeasibleModel";
  }
  return "Unknown";
}

std::optional<AbstainReason> abstain_reason_from_string(const std::string& s) {
  for (auto r : {AbstainReason::NotUnanimous, AbstainReason::UnseenAtom,
                 AbstainReason::NonIntegralOutput,
                 AbstainReason::InfeasibleModel}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

bool has_unseen_atom(const CountVector& x, const std::vector<bool>& seen) {
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] > 0 && (s >= seen.size() || !seen[s])) return true;
  }
  return false;
}

}  // namespace unanimous
