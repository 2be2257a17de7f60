#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "unanimous/error.hpp"

namespace unanimous {

// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DimensionMismatch("row length mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = Matrix<std::int64_t>;
using RealMatrix = Matrix<double>;

// Ordered set of distinct atom strings. Positions never move once assigned.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> atoms);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<std::string>& atoms() const { return atoms_; }
  const std::string& at(std::size_t i) const { return atoms_.at(i); }
  std::optional<std::size_t> find(const std::string& atom) const;
  // Returns the existing position or appends.
  std::size_t add(const std::string& atom);

  bool operator==(const Vocabulary& other) const {
    return atoms_ == other.atoms_;
  }

 private:
  std::vector<std::string> atoms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Bag of atoms as non-negative counts over a vocabulary.
struct CountVector {
  std::vector<std::int64_t> counts;

  CountVector() = default;
  explicit CountVector(std::size_t n) : counts(n, 0) {}
  explicit CountVector(std::vector<std::int64_t> c);

  std::size_t size() const { return counts.size(); }
  std::int64_t operator[](std::size_t i) const { return counts[i]; }
  std::int64_t total() const;
  bool is_zero() const;
  // Zero-extends (or checks that truncated entries are zero) to length n.
  CountVector resized(std::size_t n) const;

  bool operator==(const CountVector&) const = default;
  auto operator<=>(const CountVector&) const = default;
};

struct Example {
  CountVector input;
  CountVector output;
};

enum class UnseenPolicy { Reject, Extend };

CountVector bag_from_tokens(std::span<const std::string> tokens,
                            Vocabulary& vocab, UnseenPolicy policy);
CountVector bag_from_tokens(std::span<const std::string> tokens,
                            const Vocabulary& vocab);
// Query-time encoding: tokens missing from vocab are counted in positions
// past its end, which deciders treat as unseen atoms.
CountVector bag_for_query(std::span<const std::string> tokens,
                          const Vocabulary& vocab);
// Multiset of atoms named by a count vector, in vocabulary order.
std::vector<std::string> tokens_from_bag(const CountVector& bag,
                                         const Vocabulary& vocab);

// Training data as the paired count matrices S (inputs) and T (outputs).
class Dataset {
 public:
  Dataset() = default;
  Dataset(Vocabulary source_vocab, Vocabulary target_vocab, IntMatrix S,
          IntMatrix T);

  const Vocabulary& source_vocab() const { return source_vocab_; }
  const Vocabulary& target_vocab() const { return target_vocab_; }
  const IntMatrix& S() const { return S_; }
  const IntMatrix& T() const { return T_; }

  std::size_t size() const { return S_.rows(); }
  std::size_t num_source() const { return source_vocab_.size(); }
  std::size_t num_target() const { return target_vocab_.size(); }

  CountVector input(std::size_t i) const;
  CountVector output(std::size_t i) const;
  Example example(std::size_t i) const { return {input(i), output(i)}; }
  std::vector<Example> examples() const;

  // Rows in the given order, same vocabularies.
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset without(std::size_t row) const;
  Dataset with_outputs(IntMatrix T) const;
  // A source atom is seen when some training input contains it.
  std::vector<bool> seen_sources() const;

 private:
  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  IntMatrix S_;
  IntMatrix T_;
};

Dataset dataset_matrices(std::span<const Example> examples,
                         Vocabulary source_vocab, Vocabulary target_vocab);

// Accumulates token-level examples, assigning vocabulary positions by first
// appearance; earlier vectors are zero-padded when later rows add atoms.
class DatasetBuilder {
 public:
  DatasetBuilder() = default;
  DatasetBuilder(Vocabulary source_vocab, Vocabulary target_vocab)
      : source_vocab_(std::move(source_vocab)),
        target_vocab_(std::move(target_vocab)) {}

  void add(std::span<const std::string> source,
           std::span<const std::string> target);
  Dataset build() const;

 private:
  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  std::vector<Example> examples_;
};

enum class AbstainReason {
  NotUnanimous,
  UnseenAtom,
  NonIntegralOutput,
  InfeasibleModel
};

const char* to_string(AbstainReason reason);
std::optional<AbstainReason> abstain_reason_from_string(const std::string& s);

class Prediction {
 public:
  static Prediction answer(CountVector output) {
    Prediction p;
    p.output_ = std::move(output);
    return p;
  }
  static Prediction abstain(AbstainReason reason) {
    Prediction p;
    p.reason_ = reason;
    return p;
  }

  bool answered() const { return output_.has_value(); }
  bool abstained() const { return !answered(); }
  const CountVector& output() const { return output_.value(); }
  AbstainReason reason() const { return reason_; }

  bool operator==(const Prediction& o) const {
    return output_ == o.output_ && (answered() || reason_ == o.reason_);
  }

 private:
  Prediction() = default;
  std::optional<CountVector> output_;
  AbstainReason reason_ = AbstainReason::NotUnanimous;
};

// True when x puts positive mass on a source atom no training input uses
// (including positions past the training vocabulary).
bool has_unseen_atom(const CountVector& x, const std::vector<bool>& seen);

}  // namespace unanimous
