#include "unanimous/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "unanimous/eval.hpp"
#include "unanimous/parallel.hpp"

namespace unanimous {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.is_array()) throw FormatError(std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw FormatError(std::string("'") + key + "' holds a non-string");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<TokenExample> read_jsonl(std::istream& in) {
  std::vector<TokenExample> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (!j.is_object() || !j.contains("source")) throw FormatError("missing 'source'");
      TokenExample ex;
      ex.source = string_list(j["source"], "source");
      if (j.contains("target")) ex.target = string_list(j["target"], "target");
      if (j.contains("candidates")) {
        for (const auto& c : j["candidates"]) {
          ex.candidates.push_back(string_list(c, "candidates"));
        }
      }
      if (j.contains("logical_form")) ex.logical_form = j["logical_form"].get<std::string>();
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(number) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TokenExample> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, std::span<const TokenExample> examples) {
  for (const auto& ex : examples) {
    json j;
    j["source"] = ex.source;
    if (ex.target) j["target"] = *ex.target;
    if (!ex.candidates.empty()) j["candidates"] = ex.candidates;
    if (ex.logical_form) j["logical_form"] = *ex.logical_form;
    out << j.dump() << '\n';
  }
}

void write_jsonl_file(const std::string& path, std::span<const TokenExample> examples) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  write_jsonl(out, examples);
}

Dataset to_dataset(std::span<const TokenExample> examples, Vocabulary source_vocab,
                   Vocabulary target_vocab) {
  DatasetBuilder builder(std::move(source_vocab), std::move(target_vocab));
  for (const auto& ex : examples) {
    if (!ex.target) throw FormatError("example without 'target'");
    builder.add(ex.source, *ex.target);
  }
  return builder.build();
}

DenotationData to_denotation_data(std::span<const TokenExample> examples) {
  DenotationData data;
  auto candidates_of = [](const TokenExample& ex) {
    auto c = ex.candidates;
    if (ex.target) c.push_back(*ex.target);
    if (c.empty()) throw FormatError("example without 'target' or 'candidates'");
    return c;
  };
  for (const auto& ex : examples) {
    for (const auto& tok : ex.source) data.source_vocab.add(tok);
    for (const auto& c : candidates_of(ex)) {
      for (const auto& tok : c) data.target_vocab.add(tok);
    }
  }
  for (const auto& ex : examples) {
    DenotationExample de;
    de.input = bag_from_tokens(ex.source, data.source_vocab);
    for (const auto& c : candidates_of(ex)) {
      de.candidates.push_back(bag_from_tokens(c, data.target_vocab));
    }
    data.examples.push_back(std::move(de));
  }
  return data;
}

std::vector<TokenExample> from_examples(std::span<const Example> examples,
                                        const Vocabulary& source_vocab,
                                        const Vocabulary& target_vocab) {
  std::vector<TokenExample> out;
  for (const auto& ex : examples) {
    TokenExample te;
    te.source = tokens_from_bag(ex.input, source_vocab);
    te.target = tokens_from_bag(ex.output, target_vocab);
    out.push_back(std::move(te));
  }
  return out;
}

std::vector<TokenExample> from_dataset(const Dataset& d) {
  const auto examples = d.examples();
  return from_examples(examples, d.source_vocab(), d.target_vocab());
}

std::size_t synth_cluster_of(const SynthConfig& cfg, std::size_t source) {
  return source / (cfg.n_source / cfg.n_clusters);
}

SynthData synth_generate(const SynthConfig& cfg) {
  if (cfg.n_clusters == 0 || cfg.n_source % cfg.n_clusters != 0) {
    throw DimensionMismatch("clusters must divide the source atoms evenly");
  }
  if (cfg.len_min > cfg.len_max || cfg.len_min == 0) {
    throw DimensionMismatch("input lengths need 0 < len_min <= len_max");
  }
  if (cfg.targets_min > cfg.targets_max || cfg.targets_max > cfg.n_target) {
    throw DimensionMismatch("targets per source out of range");
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> src, tgt;
  for (std::size_t s = 0; s < cfg.n_source; ++s) src.push_back("s" + std::to_string(s));
  for (std::size_t t = 0; t < cfg.n_target; ++t) tgt.push_back("t" + std::to_string(t));

  SynthData out;
  out.config = cfg;
  out.M_star = IntMatrix(cfg.n_source, cfg.n_target);
  std::uniform_int_distribution<std::size_t> how_many(cfg.targets_min, cfg.targets_max);
  std::vector<std::size_t> order(cfg.n_target);
  for (std::size_t s = 0; s < cfg.n_source; ++s) {
    const auto k = how_many(rng);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j = 0; j < k; ++j) out.M_star(s, order[j]) = 1;
  }

  const std::size_t width = cfg.n_source / cfg.n_clusters;
  std::uniform_int_distribution<std::size_t> cluster(0, cfg.n_clusters - 1);
  std::uniform_int_distribution<std::size_t> length(cfg.len_min, cfg.len_max);
  std::uniform_int_distribution<std::size_t> member(0, width - 1);
  auto draw = [&] {
    Example ex{CountVector(cfg.n_source), CountVector(cfg.n_target)};
    const auto c = cluster(rng);
    const auto len = length(rng);
    for (std::size_t j = 0; j < len; ++j) ++ex.input.counts[c * width + member(rng)];
    for (std::size_t s = 0; s < cfg.n_source; ++s) {
      if (ex.input[s] == 0) continue;
      for (std::size_t t = 0; t < cfg.n_target; ++t) {
        ex.output.counts[t] += ex.input[s] * out.M_star(s, t);
      }
    }
    return ex;
  };
  std::vector<Example> train;
  for (std::size_t i = 0; i < cfg.n_train; ++i) train.push_back(draw());
  for (std::size_t i = 0; i < cfg.n_test; ++i) out.test.push_back(draw());
  out.train = dataset_matrices(train, Vocabulary(src), Vocabulary(tgt));
  return out;
}

std::string SynthData::sidecar_json() const {
  json j;
  j["seed"] = config.seed;
  j["config"] = {{"n_source", config.n_source},   {"n_target", config.n_target},
                 {"n_train", config.n_train},     {"n_test", config.n_test},
                 {"n_clusters", config.n_clusters}, {"len_min", config.len_min},
                 {"len_max", config.len_max},     {"targets_min", config.targets_min},
                 {"targets_max", config.targets_max}};
  json m = json::array();
  for (std::size_t s = 0; s < M_star.rows(); ++s) {
    auto row = M_star.row(s);
    m.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  j["M_star"] = std::move(m);
  return j.dump(2);
}

Dataset inject_noise(const Dataset& d, const NoiseSpec& spec) {
  if (spec.n_mistakes < 0) throw DimensionMismatch("negative noise amount");
  if (spec.n_mistakes == 0) return d;
  const std::size_t n = d.size(), nt = d.num_target();
  if (n * nt == 0) throw DimensionMismatch("no output cells to corrupt");
  IntMatrix T = d.T();
  std::vector<int> dir(n * nt, 0);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n * nt - 1);
  std::bernoulli_distribution coin(0.5);
  const std::size_t cap = 1000 * (static_cast<std::size_t>(spec.n_mistakes) + n * nt);
  std::size_t attempts = 0;
  for (std::int64_t e = 0; e < spec.n_mistakes;) {
    if (++attempts > cap) throw DimensionMismatch("no legal edit left");
    const auto c = pick(rng);
    auto& v = T.data()[c];
    if (dir[c] == 0) dir[c] = (v == 0 || coin(rng)) ? 1 : -1;
    if (dir[c] < 0 && v == 0) continue;
    v += dir[c];
    ++e;
  }
  return d.with_outputs(std::move(T));
}

AdversarialResult adversarial_subsample(const Dataset& train, std::span<const Example> test,
                                        double fraction,
                                        const AdversarialOptions& options) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DimensionMismatch("subsample fraction must lie in (0, 1]");
  }
  const std::size_t n = train.size();
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);

  auto score = [&](const Dataset& sub) {
    const auto dec = Decider::train(sub, options.mode, 0, options.seed);
    const double unanimous = evaluate(dec, test, Exec::Serial).f1();
    const auto est = PointEstimate::fit(sub);
    double best = 0.0;
    for (double eps : options.epsilons) best = std::max(best, evaluate(est, eps, test).f1());
    return unanimous - best;
  };

  if (k == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return {train, all, score(train)};
  }
  const std::size_t trials = std::max<std::size_t>(options.trials, 1);
  std::vector<std::vector<std::size_t>> rows(trials);
  std::vector<double> diff(trials);
  for_each_index(trials, options.exec, [&](std::size_t trial) {
    std::mt19937_64 rng(splitmix(options.seed ^ splitmix(trial)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    diff[trial] = score(train.subset(idx));
    rows[trial] = std::move(idx);
  });
  std::size_t best = 0;
  for (std::size_t t = 1; t < trials; ++t) {
    const bool better = options.objective == AdversarialObjective::MaxDiff
                            ? diff[t] > diff[best]
                            : diff[t] < diff[best];
    if (better) best = t;
  }
  return {train.subset(rows[best]), rows[best], diff[best]};
}

}  // namespace unanimous
