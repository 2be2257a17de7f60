#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unanimous/core.hpp"
#include "unanimous/ilp.hpp"
#include "unanimous/unanimity.hpp"

namespace unanimous {

// One line of the JSONL dataset format. "target" carries exact supervision,
// "candidates" denotation supervision; "logical_form" is optional text.
struct TokenExample {
  std::vector<std::string> source;
  std::optional<std::vector<std::string>> target;
  std::vector<std::vector<std::string>> candidates;
  std::optional<std::string> logical_form;
};

std::vector<TokenExample> read_jsonl(std::istream& in);
std::vector<TokenExample> read_jsonl_file(const std::string& path);
void write_jsonl(std::ostream& out, std::span<const TokenExample> examples);
void write_jsonl_file(const std::string& path, std::span<const TokenExample> examples);

// Every example must carry a target. Vocabularies are extended from the
// given ones in order of first appearance.
Dataset to_dataset(std::span<const TokenExample> examples, Vocabulary source_vocab = {},
                   Vocabulary target_vocab = {});
// A target counts as a single candidate.
DenotationData to_denotation_data(std::span<const TokenExample> examples);
std::vector<TokenExample> from_dataset(const Dataset& d);
std::vector<TokenExample> from_examples(std::span<const Example> examples,
                                        const Vocabulary& source_vocab,
                                        const Vocabulary& target_vocab);

struct SynthConfig {
  std::size_t n_source = 50;
  std::size_t n_target = 20;
  std::size_t n_train = 120;
  std::size_t n_test = 50;
  std::size_t n_clusters = 10;
  std::size_t len_min = 5;
  std::size_t len_max = 10;
  std::size_t targets_min = 0;
  std::size_t targets_max = 2;
  std::uint64_t seed = 0;
};

struct SynthData {
  IntMatrix M_star;  // n_source x n_target
  Dataset train;     // vocabularies s0.. and t0.., all atoms present
  std::vector<Example> test;
  SynthConfig config;

  // M*, config and seed for later verification.
  std::string sidecar_json() const;
};

SynthData synth_generate(const SynthConfig& cfg);
// Sources of the cluster an atom belongs to.
std::size_t synth_cluster_of(const SynthConfig& cfg, std::size_t source);

struct NoiseSpec {
  std::int64_t n_mistakes = 0;
  std::uint64_t seed = 0;
};

// Exactly n_mistakes unit edits; each touched cell moves in one direction
// only, so ||T' - T||_1 = n_mistakes. The edits for n are a prefix of the
// edits for n + 1 under the same seed.
Dataset inject_noise(const Dataset& d, const NoiseSpec& spec);

enum class AdversarialObjective { MaxDiff, MinDiff };

struct AdversarialOptions {
  std::size_t trials = 100;
  AdversarialObjective objective = AdversarialObjective::MaxDiff;
  std::uint64_t seed = 0;
  Mode mode = Mode::Ilp;
  std::vector<double> epsilons = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  Exec exec = default_exec();
};

struct AdversarialResult {
  Dataset data;
  std::vector<std::size_t> rows;  // indices into the full training set
  double difference = 0.0;        // F1(unanimous) - best F1(point estimate)
};

// Among seeded random subsamples of round(f * n) rows, the one extremising
// the F1 gap on `test`.
AdversarialResult adversarial_subsample(const Dataset& train, std::span<const Example> test,
                                        double fraction,
                                        const AdversarialOptions& options = {});

}  // namespace unanimous
