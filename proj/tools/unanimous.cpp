#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "unanimous/data.hpp"
#include "unanimous/eval.hpp"
#include "unanimous/extensions.hpp"
#include "unanimous/semparse.hpp"
#include "unanimous/unanimity.hpp"

using namespace unanimous;
using nlohmann::json;

namespace {

struct Globals {
  std::string mode = "ilp";
  std::uint64_t seed = 0;
  std::int64_t n_mistakes = 0;
  std::size_t kgram = 0;  // 0: tokens are atoms
  std::string scheme = "B";
  double tolerance = 0.0;
  std::string format = "jsonl";
};

Mode parse_mode(const std::string& s) {
  auto m = mode_from_string(s);
  if (!m) throw CLI::ValidationError("--mode", "unknown mode " + s);
  return *m;
}

FeaturizerConfig featurizer(const Globals& g) {
  FeaturizerConfig cfg;
  cfg.k = g.kgram;
  return cfg;
}

TargetScheme scheme(const Globals& g) {
  TargetScheme s;
  s.mode = g.scheme == "A" ? SchemeMode::PredicatesOnly : SchemeMode::PredicateWithArgOrder;
  return s;
}

std::vector<std::string> source_atoms(const TokenExample& ex, const FeaturizerConfig& cfg) {
  if (cfg.k == 0) return ex.source;
  return kgrams(ex.source, cfg);
}

// Featurises sources and derives missing targets from logical forms.
std::vector<TokenExample> prepare(std::vector<TokenExample> examples, const Globals& g) {
  const auto cfg = featurizer(g);
  const auto sch = scheme(g);
  for (auto& ex : examples) {
    ex.source = source_atoms(ex, cfg);
    if (!ex.target && ex.logical_form) {
      ex.target = target_atoms(LogicalForm::parse(*ex.logical_form), sch);
    }
  }
  return examples;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

json prediction_json(const std::vector<std::string>& input, const Prediction& p,
                     const Vocabulary& target_vocab) {
  json j;
  j["input"] = input;
  if (p.answered()) {
    j["output"] = tokens_from_bag(p.output(), target_vocab);
  } else {
    j["abstain"] = to_string(p.reason());
  }
  return j;
}

std::string model_json(const Decider& dec, const Globals& g) {
  json j;
  j["featurizer"] = {{"k", g.kgram}};
  j["decider"] = json::parse(dec.to_json());
  return j.dump();
}

std::pair<Decider, Globals> load_model(const std::string& path, Globals g) {
  const auto j = json::parse(read_text(path));
  g.kgram = j.at("featurizer").at("k").get<std::size_t>();
  return {Decider::from_json(j.at("decider").dump()), g};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unanimous prediction: answer only when every consistent mapping agrees"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--mode", g.mode, "ilp, ilp-exact, lp or ls")
      ->check(CLI::IsMember({"ilp", "ilp-exact", "lp", "ls"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed)->capture_default_str();
  app.add_option("--n-mistakes", g.n_mistakes, "noise budget (ILP modes)")
      ->capture_default_str();
  app.add_option("--kgram", g.kgram, "k-gram size; 0 treats tokens as atoms")
      ->capture_default_str();
  app.add_option("--target-scheme", g.scheme, "A: predicates, B: predicate with argument slot")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "rounding window eps for the baseline")
      ->capture_default_str();
  app.add_option("--format", g.format)->check(CLI::IsMember({"jsonl"}))->capture_default_str();
  app.fallthrough();

  std::string data_path, input_path, out_path, model_path;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  SynthConfig sc;
  std::string test_path, sidecar_path;
  synth->add_option("--n-train", sc.n_train)->capture_default_str();
  synth->add_option("--n-test", sc.n_test)->capture_default_str();
  synth->add_option("--out", out_path, "training JSONL")->required();
  synth->add_option("--test-out", test_path, "test JSONL");
  synth->add_option("--sidecar", sidecar_path, "JSON with M*, config and seed");

  auto* train = app.add_subcommand("train", "train a decider and save it");
  train->add_option("--data", data_path)->required();
  train->add_option("--model", model_path)->required();

  auto* predict = app.add_subcommand("predict", "predict or abstain on inputs");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--input", input_path)->required();
  predict->add_option("--out", out_path);

  auto* clean = app.add_subcommand("clean", "remove possibly noisy training rows");
  std::string method = "loo", rule = "strict";
  clean->add_option("--data", data_path)->required();
  clean->add_option("--out", out_path);
  clean->add_option("--method", method)->check(CLI::IsMember({"loo", "l1"}))->capture_default_str();
  clean->add_option("--rule", rule)->check(CLI::IsMember({"strict", "literal"}))->capture_default_str();

  auto* spans = app.add_subcommand("spans", "annotate LS-safe spans of sentences");
  spans->add_option("--data", data_path)->required();
  spans->add_option("--input", input_path)->required();
  spans->add_option("--out", out_path);

  auto* recon = app.add_subcommand("reconstruct", "rebuild logical forms from predicted bags");
  std::string forms_path, table_path;
  recon->add_option("--data", data_path, "training JSONL; its logical forms build the table");
  recon->add_option("--forms", forms_path, "training logical forms, one per line");
  recon->add_option("--table", table_path, "compatibility table JSON");
  recon->add_option("--input", input_path, "predict output, or JSONL with target lists")->required();
  recon->add_option("--out", out_path);

  auto* active = app.add_subcommand("active", "select inputs worth labelling");
  active->add_option("--data", data_path)->required();
  active->add_option("--out", out_path);

  auto* para = app.add_subcommand("paraphrase", "group a pool of inputs into paraphrase classes");
  para->add_option("--data", data_path)->required();
  para->add_option("--input", input_path, "pool JSONL")->required();
  para->add_option("--out", out_path);

  auto* exper = app.add_subcommand("experiment", "run an experiment and print CSV");
  std::string kind = "fraction_curve";
  ExperimentConfig ec;
  exper->add_option("--kind", kind)
      ->check(CLI::IsMember({"fraction_curve", "noise_curve", "adversarial", "active_vs_passive"}))
      ->capture_default_str();
  exper->add_option("--trials", ec.trials)->capture_default_str();
  exper->add_option("--noise-train", ec.noise_train)->capture_default_str();
  exper->add_option("--noise-ratio", ec.noise_ratio)->capture_default_str();
  exper->add_option("--out", out_path);

  auto* base = app.add_subcommand("baseline", "least-squares point estimate with eps rounding");
  base->add_option("--data", data_path)->required();
  base->add_option("--input", input_path)->required();
  base->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      sc.seed = g.seed;
      const auto data = synth_generate(sc);
      const auto rows = from_dataset(data.train);
      write_jsonl_file(out_path, rows);
      if (!test_path.empty()) {
        write_jsonl_file(test_path, from_examples(data.test, data.train.source_vocab(),
                                                  data.train.target_vocab()));
      }
      if (!sidecar_path.empty()) write_text(sidecar_path, data.sidecar_json() + "\n");
    } else if (train->parsed()) {
      const auto d = to_dataset(prepare(read_jsonl_file(data_path), g));
      const auto dec = Decider::train(d, parse_mode(g.mode), g.n_mistakes, g.seed);
      write_text(model_path, model_json(dec, g) + "\n");
      std::cerr << "trained " << to_string(dec.mode()) << " on " << d.size() << " rows"
                << (dec.feasible() ? "" : " (no mapping fits the budget)") << "\n";
    } else if (predict->parsed()) {
      const auto [dec, mg] = load_model(model_path, g);
      const auto inputs = prepare(read_jsonl_file(input_path), mg);
      std::vector<CountVector> bags;
      for (const auto& ex : inputs) bags.push_back(bag_for_query(ex.source, dec.dataset().source_vocab()));
      const auto preds = dec.predict_batch(bags);
      std::string out;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        out += prediction_json(inputs[i].source, preds[i], dec.dataset().target_vocab()).dump() + "\n";
      }
      write_text(out_path, out);
    } else if (clean->parsed()) {
      const auto raw = read_jsonl_file(data_path);
      const auto d = to_dataset(prepare(raw, g));
      CleanResult res;
      if (method == "l1") {
        res = clean_l1_residual(d);
      } else {
        CleaningOptions opts;
        opts.rule = rule == "literal" ? CleaningRule::Literal : CleaningRule::Strict;
        opts.seed = g.seed;
        res = clean_leave_one_out(d, g.n_mistakes, opts);
      }
      std::vector<TokenExample> kept;
      for (auto i : res.kept) kept.push_back(raw[i]);
      std::ostringstream ss;
      write_jsonl(ss, kept);
      write_text(out_path, ss.str());
      std::cerr << "kept " << res.kept.size() << " of " << d.size() << " rows\n";
    } else if (spans->parsed()) {
      FeaturizerConfig cfg;
      cfg.k = std::max<std::size_t>(g.kgram, 1);
      auto gk = g;
      gk.kgram = cfg.k;
      const auto d = to_dataset(prepare(read_jsonl_file(data_path), gk));
      const auto dec = Decider::train(d, Mode::Ls);
      std::string out;
      for (const auto& ex : read_jsonl_file(input_path)) {
        const auto found = annotate_safe_spans(ex.source, dec, cfg);
        json j;
        j["input"] = ex.source;
        j["spans"] = json::array();
        for (const auto& s : found) {
          j["spans"].push_back({{"begin", s.begin},
                                {"end", s.end},
                                {"output", tokens_from_bag(s.output, d.target_vocab())}});
        }
        const auto all = combine_spans(found, d.num_target());
        j["combined"] = tokens_from_bag(all, d.target_vocab());
        out += j.dump() + "\n";
      }
      write_text(out_path, out);
    } else if (recon->parsed()) {
      CompatibilityTable table;
      if (!table_path.empty()) table = CompatibilityTable::from_json(read_text(table_path));
      if (!forms_path.empty()) {
        std::istringstream lines(read_text(forms_path));
        for (std::string line; std::getline(lines, line);) {
          if (line.find_first_not_of(" \t\r") != std::string::npos) {
            table.add(LogicalForm::parse(line));
          }
        }
      }
      if (!data_path.empty()) {
        for (const auto& ex : read_jsonl_file(data_path)) {
          if (ex.logical_form) table.add(LogicalForm::parse(*ex.logical_form));
        }
      }
      std::string out;
      std::istringstream lines(read_text(input_path));
      std::size_t lineno = 0;
      for (std::string line; std::getline(lines, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json in;
        try {
          in = json::parse(line);
        } catch (const json::exception& e) {
          throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
        json j;
        if (in.contains("input")) j["input"] = in["input"];
        const char* key = in.contains("output") ? "output" : "target";
        if (!in.contains(key)) {
          j["abstain"] = in.value("abstain", std::string("NotUnanimous"));
          out += j.dump() + "\n";
          continue;
        }
        const auto atoms = in[key].get<std::vector<std::string>>();
        j["atoms"] = atoms;
        if (const auto lf = reconstruct(atoms, table)) {
          j["logical_form"] = lf->to_string();
        } else {
          j["abstain"] = "NotUnanimous";
        }
        out += j.dump() + "\n";
      }
      write_text(out_path, out);
    } else if (active->parsed()) {
      const auto d = to_dataset(prepare(read_jsonl_file(data_path), g));
      std::vector<CountVector> inputs;
      for (std::size_t i = 0; i < d.size(); ++i) inputs.push_back(d.input(i));
      const auto sel = active_select(inputs);
      json j;
      j["queries"] = sel.queries;
      j["rank"] = sel.state.rank();
      write_text(out_path, j.dump() + "\n");
    } else if (para->parsed()) {
      const auto d = to_dataset(prepare(read_jsonl_file(data_path), g));
      const auto dec = Decider::train(d, Mode::Ls);
      const auto pool = prepare(read_jsonl_file(input_path), g);
      std::vector<CountVector> bags;
      for (const auto& ex : pool) bags.push_back(bag_for_query(ex.source, d.source_vocab()));
      const auto part = paraphrase_classes(bags, dec);
      json j;
      j["classes"] = json::array();
      for (const auto& c : part.classes) {
        json members = json::array();
        for (auto i : c.members) members.push_back(pool[i].source);
        // Atoms when the shared output is a bag, exact fractions otherwise.
        const bool bag = std::all_of(c.output.begin(), c.output.end(),
                                     [](const Rational& q) { return is_integral(q) && sgn(q) >= 0; });
        json output = json::array();
        if (bag) {
          CountVector y(c.output.size());
          for (std::size_t t = 0; t < y.size(); ++t) y.counts[t] = c.output[t].get_num().get_si();
          output = tokens_from_bag(y, d.target_vocab());
        } else {
          for (const auto& q : c.output) output.push_back(q.get_str());
        }
        j["classes"].push_back({{"output", output}, {"members", members}});
      }
      j["unsafe"] = json::array();
      for (auto i : part.unsafe) j["unsafe"].push_back(pool[i].source);
      write_text(out_path, j.dump() + "\n");
    } else if (exper->parsed()) {
      ec.seed = g.seed;
      ec.synth.seed = g.seed;
      const auto table = run_experiment(*experiment_from_string(kind), ec);
      write_text(out_path, table.to_csv());
    } else if (base->parsed()) {
      const auto d = to_dataset(prepare(read_jsonl_file(data_path), g));
      const auto est = PointEstimate::fit(d);
      const auto inputs = prepare(read_jsonl_file(input_path), g);
      std::vector<Prediction> preds;
      std::vector<CountVector> gold;
      bool scored = true;
      std::string out;
      for (const auto& ex : inputs) {
        const auto x = bag_for_query(ex.source, d.source_vocab());
        preds.push_back(est.predict(x, g.tolerance));
        out += prediction_json(ex.source, preds.back(), d.target_vocab()).dump() + "\n";
        if (ex.target) {
          gold.push_back(bag_for_query(*ex.target, d.target_vocab()));
        } else {
          scored = false;
        }
      }
      write_text(out_path, out);
      if (scored && !inputs.empty()) {
        const auto pr = evaluate(preds, gold);
        std::cerr << "precision " << pr.precision << " recall " << pr.recall << " answered "
                  << pr.answered << "/" << pr.total << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
