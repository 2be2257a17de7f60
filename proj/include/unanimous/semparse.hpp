#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/unanimity.hpp"

namespace unanimous {

struct FeaturizerConfig {
  std::size_t k = 2;
  // Appended once at the end of every sentence; empty disables padding.
  std::string null_token = "<null>";
  // Token rewrite applied before k-grams are formed.
  std::map<std::string, std::string> entity_collapse;
};

// Contiguous k-grams (tokens joined by a space) of the padded sentence.
std::vector<std::string> kgrams(std::span<const std::string> tokens,
                                const FeaturizerConfig& cfg);

CountVector featurize(std::span<const std::string> tokens,
                      const FeaturizerConfig& cfg, Vocabulary& vocab,
                      UnseenPolicy policy);
// Unseen k-grams land past the end of vocab (see bag_for_query).
CountVector featurize(std::span<const std::string> tokens,
                      const FeaturizerConfig& cfg, const Vocabulary& vocab);

// Variable-free functional logical form, e.g. city(loc_1(Columbia)).
struct LogicalForm {
  std::string label;
  std::vector<LogicalForm> args;

  static LogicalForm parse(std::string_view text);
  std::string to_string() const;
  std::size_t size() const;

  bool operator==(const LogicalForm&) const = default;
  auto operator<=>(const LogicalForm&) const = default;
};

// Conjunctive form with variables, e.g. city(x), loc(x,Columbia).
// Single lowercase letters are variables.
struct Conjunct {
  std::string predicate;
  std::vector<std::string> args;
};
std::vector<Conjunct> parse_conjunctive(std::string_view text);

enum class SchemeMode { PredicatesOnly, PredicateWithArgOrder };

struct TargetScheme {
  SchemeMode mode = SchemeMode::PredicateWithArgOrder;
  // Label renames applied first, e.g. traverse_1 -> loc_1.
  std::map<std::string, std::string> rename;
};

// "loc_1" -> "loc"; labels without a _<digits> suffix are unchanged.
std::string strip_arg_position(const std::string& label);

std::vector<std::string> target_atoms(const LogicalForm& lf,
                                      const TargetScheme& scheme);
std::vector<std::string> target_atoms(std::span<const Conjunct> form,
                                      const TargetScheme& scheme);
CountVector encode_targets(const LogicalForm& lf, const TargetScheme& scheme,
                           Vocabulary& vocab, UnseenPolicy policy);

// Attachments (parent, slot, child) seen in training forms; slots are
// 1-based to match the _1/_2 atom suffixes.
class CompatibilityTable {
 public:
  void add(const LogicalForm& lf);
  void add_edge(const std::string& parent, std::size_t slot,
                const std::string& child);

  bool allows(const std::string& parent, std::size_t slot,
              const std::string& child) const;
  // Largest argument count observed for label (0 if never seen as parent).
  std::size_t arity(const std::string& label) const;

  const std::set<std::tuple<std::string, std::size_t, std::string>>& edges() const {
    return edges_;
  }

  static CompatibilityTable from_forms(std::span<const LogicalForm> forms);
  std::string to_json() const;
  static CompatibilityTable from_json(const std::string& text);

 private:
  std::set<std::tuple<std::string, std::size_t, std::string>> edges_;
  std::map<std::string, std::size_t> arity_;
};

struct ReconstructOptions {
  std::size_t budget = 100000;  // partial trees; SearchBudgetExceeded beyond
};

// The unique tree using each atom exactly as often as the bag says, or
// nullopt when there are none or several.
std::optional<LogicalForm> reconstruct(std::span<const std::string> atoms,
                                       const CompatibilityTable& table,
                                       const ReconstructOptions& options = {});
std::optional<LogicalForm> reconstruct(const CountVector& bag,
                                       const Vocabulary& target_vocab,
                                       const CompatibilityTable& table,
                                       const ReconstructOptions& options = {});

struct SafeSpan {
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;
  CountVector output;
};

// Every contiguous span whose featurised bag the LS decider answers, shortest
// first then left to right. A span reaching the sentence end also takes the
// trailing null k-grams.
std::vector<SafeSpan> annotate_safe_spans(std::span<const std::string> tokens,
                                          const Decider& dec,
                                          const FeaturizerConfig& cfg);

// Sum of outputs over a greedy longest-first choice of non-overlapping spans.
CountVector combine_spans(std::span<const SafeSpan> spans, std::size_t num_target);

}  // namespace unanimous
