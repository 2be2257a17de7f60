#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/ilp.hpp"
#include "unanimous/rational.hpp"
#include "unanimous/unanimity.hpp"

namespace unanimous {

// Incrementally reduced basis of the inputs queried so far.
class ActiveState {
 public:
  explicit ActiveState(std::size_t dim = 0) : dim_(dim) {}

  // Queries x (and returns true) unless it lies in the current row space.
  bool offer(std::size_t index, const CountVector& x);
  bool in_span(const CountVector& x) const;

  const std::vector<std::size_t>& queried() const { return queried_; }
  std::size_t rank() const { return rows_.size(); }
  std::size_t dimension() const { return dim_; }
  // Reduced row echelon form of the queried rows.
  RationalMatrix basis() const;

 private:
  RationalVector reduce(const CountVector& x) const;

  std::size_t dim_;
  std::vector<RationalVector> rows_;
  std::vector<std::size_t> pivots_;
  std::vector<std::size_t> queried_;
};

struct ActiveSelection {
  std::vector<std::size_t> queries;
  ActiveState state;
};

// One pass in stream order; inputs of different lengths are zero-extended.
ActiveSelection active_select(std::span<const CountVector> inputs);

// Exact alpha^T T for an input in the LS safe set, nullopt otherwise.
std::optional<RationalVector> ls_output(const Decider& dec, const CountVector& x);

// Throws NotSafe naming the argument outside the LS safe set.
bool are_paraphrases(const CountVector& x, const CountVector& x2, const Decider& dec);

struct ParaphraseClass {
  RationalVector output;
  std::vector<std::size_t> members;  // pool indices
};

struct ParaphrasePartition {
  std::vector<ParaphraseClass> classes;  // in order of first member
  std::vector<std::size_t> unsafe;
};

ParaphrasePartition paraphrase_classes(std::span<const CountVector> pool,
                                       const Decider& dec);

// Unanimity over every (M, pi) pair consistent with the candidate sets.
// Throws InfeasibleData when there is none.
Prediction predict_with_denotations(const DenotationData& data, const CountVector& x,
                                    Relaxation relaxation, std::uint64_t seed = 0,
                                    const IlpOptions& options = {});

}  // namespace unanimous
