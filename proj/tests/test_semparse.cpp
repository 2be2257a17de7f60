#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "unanimous/semparse.hpp"

using namespace unanimous;

namespace {

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

FeaturizerConfig words_only() {
  FeaturizerConfig cfg;
  cfg.k = 1;
  cfg.null_token.clear();
  return cfg;
}

CompatibilityTable table1() {
  const std::vector<LogicalForm> forms{LogicalForm::parse("city(loc_1(Columbia))"),
                                       LogicalForm::parse("city(loc_2(Texas))")};
  return CompatibilityTable::from_forms(forms);
}

// Counts trees by trying every ordering of the atoms as a preorder walk,
// reading arities off the table.
std::set<std::string> all_trees(std::vector<std::string> atoms, const CompatibilityTable& table) {
  std::set<std::string> out;
  std::sort(atoms.begin(), atoms.end());
  do {
    std::size_t at = 0;
    bool ok = true;
    auto build = [&](auto&& self) -> std::string {
      const auto label = atoms[at++];
      const auto k = table.arity(label);
      std::string s = label;
      if (k == 0) return s;
      s += '(';
      for (std::size_t slot = 1; slot <= k && ok; ++slot) {
        if (at >= atoms.size()) {
          ok = false;
          return s;
        }
        if (!table.allows(label, slot, atoms[at])) ok = false;
        if (slot > 1) s += ',';
        s += self(self);
      }
      return s + ')';
    };
    const auto tree = build(build);
    if (ok && at == atoms.size()) out.insert(tree);
  } while (std::next_permutation(atoms.begin(), atoms.end()));
  return out;
}

}  // namespace

TEST_CASE("k-grams with padding") {
  FeaturizerConfig cfg;
  cfg.k = 1;
  const auto w = fixtures::words("area of Ohio");
  CHECK(kgrams(w, cfg) == std::vector<std::string>{"area", "of", "Ohio", "<null>"});
  cfg.k = 2;
  const auto ohio = fixtures::words("Ohio");
  CHECK(kgrams(ohio, cfg) == std::vector<std::string>{"Ohio <null>"});
  CHECK(kgrams(w, cfg) == std::vector<std::string>{"area of", "of Ohio", "Ohio <null>"});
  cfg.k = 0;
  CHECK_THROWS_AS(kgrams(w, cfg), DimensionMismatch);
}

TEST_CASE("k-gram count is padded length minus k plus one") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 9), tok(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> t;
    for (int i = len(rng); i > 0; --i) t.push_back("w" + std::to_string(tok(rng)));
    FeaturizerConfig cfg;
    cfg.k = 1 + trial % 3;
    const std::size_t padded = t.size() + 1;
    const std::size_t want = padded >= cfg.k ? padded - cfg.k + 1 : 0;
    CHECK(kgrams(t, cfg).size() == want);
  }
}

TEST_CASE("bigrams separate polysemous words") {
  FeaturizerConfig cfg;
  Vocabulary vocab;
  const auto river = fixtures::words("largest river"), city = fixtures::words("largest city");
  const auto a = featurize(river, cfg, vocab, UnseenPolicy::Extend);
  const auto b = featurize(city, cfg, vocab, UnseenPolicy::Extend);
  CHECK(vocab.size() == 4);
  const auto ar = a.resized(4), br = b.resized(4);
  for (std::size_t s = 0; s < 4; ++s) CHECK(ar[s] * br[s] == 0);
  CHECK(vocab.find("largest river").has_value());
  CHECK(vocab.find("largest city").has_value());

  // Unigrams share "largest", so S M = T has no solution; bigrams fix that.
  Vocabulary uni;
  FeaturizerConfig k1;
  k1.k = 1;
  const auto u1 = featurize(river, k1, uni, UnseenPolicy::Extend);
  const auto u2 = featurize(city, k1, uni, UnseenPolicy::Extend);
  CHECK(u1.resized(uni.size())[0] == 1);
  CHECK(u2.resized(uni.size())[0] == 1);
}

TEST_CASE("entity collapse and unseen k-grams") {
  FeaturizerConfig cfg;
  cfg.k = 1;
  cfg.entity_collapse = {{"Ohio", "STATE"}, {"Iowa", "STATE"}};
  Vocabulary vocab;
  const auto a = featurize(fixtures::words("area of Ohio"), cfg, vocab, UnseenPolicy::Extend);
  const auto b = featurize(fixtures::words("area of Iowa"), cfg, vocab, UnseenPolicy::Reject);
  CHECK(a == b);
  CHECK(vocab.find("STATE").has_value());
  const Vocabulary& frozen = vocab;
  const auto q = featurize(fixtures::words("area of Texas"), cfg, frozen);
  CHECK(q.size() > vocab.size());
  CHECK(q.total() == 4);
  CHECK_THROWS_AS(featurize(fixtures::words("Texas"), cfg, vocab, UnseenPolicy::Reject), UnseenAtomError);
}

TEST_CASE("logical form parsing and printing") {
  const auto lf = LogicalForm::parse("city(loc_1(Columbia))");
  CHECK(lf.label == "city");
  REQUIRE(lf.args.size() == 1);
  CHECK(lf.args[0].label == "loc_1");
  CHECK(lf.size() == 3);
  CHECK(lf.to_string() == "city(loc_1(Columbia))");
  const auto two = LogicalForm::parse(" answer ( count ( x , y ) ) ");
  CHECK(two.to_string() == "answer(count(x,y))");
  CHECK(LogicalForm::parse("Texas").args.empty());
  for (const char* bad : {"", "f(", "f(x", "f(x))", "f(,x)", "()"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(LogicalForm::parse(bad), FormatError);
  }
}

TEST_CASE("target atoms under both schemes") {
  TargetScheme b;
  TargetScheme a{SchemeMode::PredicatesOnly, {}};
  const auto r1 = LogicalForm::parse("city(loc_1(Columbia))");
  const auto r2 = LogicalForm::parse("city(loc_2(Texas))");
  CHECK(sorted(target_atoms(r1, b)) == sorted({"city", "loc_1", "Columbia"}));
  CHECK(sorted(target_atoms(r2, b)) == sorted({"city", "loc_2", "Texas"}));
  CHECK(sorted(target_atoms(r1, a)) == sorted({"city", "loc", "Columbia"}));

  const auto conj = parse_conjunctive("city(x), loc(x,Columbia)");
  REQUIRE(conj.size() == 2);
  CHECK(conj[1].predicate == "loc");
  CHECK(conj[1].args == std::vector<std::string>{"x", "Columbia"});
  CHECK(sorted(target_atoms(conj, a)) == sorted({"city", "loc", "Columbia"}));
  CHECK_THROWS_AS(parse_conjunctive("city(loc(x))"), FormatError);

  Vocabulary tv;
  const auto bag = encode_targets(r1, b, tv, UnseenPolicy::Extend);
  CHECK(bag.total() == 3);
  CHECK(tv.size() == 3);
}

TEST_CASE("argument positions and renames") {
  CHECK(strip_arg_position("loc_1") == "loc");
  CHECK(strip_arg_position("loc_12") == "loc");
  CHECK(strip_arg_position("loc") == "loc");
  CHECK(strip_arg_position("_1") == "_1");
  CHECK(strip_arg_position("x_y") == "x_y");
  TargetScheme s;
  s.rename = {{"traverse_1", "loc_1"}};
  CHECK(target_atoms(LogicalForm::parse("river(traverse_1(Ohio))"), s) ==
        std::vector<std::string>{"river", "loc_1", "Ohio"});
}

TEST_CASE("scheme B refines scheme A") {
  std::mt19937_64 rng(2);
  const std::vector<std::string> heads{"city", "loc_1", "loc_2", "river", "count"};
  const std::vector<std::string> leaves{"Texas", "Ohio", "Columbia"};
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> h(0, heads.size() - 1), l(0, leaves.size() - 1);
    LogicalForm lf{leaves[l(rng)], {}};
    for (int depth = 0; depth < 1 + trial % 4; ++depth) lf = LogicalForm{heads[h(rng)], {lf}};
    std::vector<std::string> stripped;
    for (const auto& atom : target_atoms(lf, {})) stripped.push_back(strip_arg_position(atom));
    CHECK(sorted(stripped) == sorted(target_atoms(lf, {SchemeMode::PredicatesOnly, {}})));
  }
}

TEST_CASE("compatibility table") {
  const auto t = table1();
  CHECK(t.allows("city", 1, "loc_1"));
  CHECK(t.allows("loc_2", 1, "Texas"));
  CHECK_FALSE(t.allows("loc_1", 1, "Texas"));
  CHECK_FALSE(t.allows("city", 2, "loc_1"));
  CHECK(t.arity("city") == 1);
  CHECK(t.arity("Texas") == 0);
  CHECK(t.edges().size() == 4);
  const auto back = CompatibilityTable::from_json(t.to_json());
  CHECK(back.edges() == t.edges());
  CHECK(back.arity("loc_1") == 1);
  CompatibilityTable u;
  CHECK_THROWS(u.add_edge("f", 0, "g"));
  CHECK_THROWS_AS(CompatibilityTable::from_json("[[\"f\", 1]]"), FormatError);
}

TEST_CASE("reconstruction of the worked forms") {
  const auto t = table1();
  const std::vector<std::string> bag{"loc_1", "Columbia", "city"};
  const auto lf = reconstruct(bag, t);
  REQUIRE(lf.has_value());
  CHECK(lf->to_string() == "city(loc_1(Columbia))");
  CHECK(all_trees(bag, t).size() == 1);

  const std::vector<std::string> texas{"Texas"};
  const auto leaf = reconstruct(texas, CompatibilityTable{});
  REQUIRE(leaf.has_value());
  CHECK(leaf->to_string() == "Texas");

  const std::vector<std::string> mixed{"loc_1", "Texas", "city"};
  CHECK_FALSE(reconstruct(mixed, t).has_value());
  CHECK_FALSE(reconstruct(std::vector<std::string>{}, t).has_value());

  Vocabulary tv({"city", "loc_1", "Columbia"});
  const auto via_bag = reconstruct(CountVector(std::vector<std::int64_t>{1, 1, 1}), tv, t);
  REQUIRE(via_bag.has_value());
  CHECK(*via_bag == *lf);
}

TEST_CASE("ambiguous bag abstains") {
  CompatibilityTable t;
  t.add_edge("f", 1, "g");
  t.add_edge("g", 1, "f");
  t.add_edge("f", 1, "c");
  t.add_edge("g", 1, "c");
  const std::vector<std::string> bag{"f", "g", "c"};
  CHECK(all_trees(bag, t) == std::set<std::string>{"f(g(c))", "g(f(c))"});
  CHECK_FALSE(reconstruct(bag, t).has_value());
}

TEST_CASE("search budget") {
  CompatibilityTable t;
  for (const char* p : {"a", "b", "c", "d"}) {
    for (const char* c : {"a", "b", "c", "d", "z"}) t.add_edge(p, 1, c);
  }
  const std::vector<std::string> bag{"a", "a", "b", "b", "c", "c", "d", "d", "z"};
  ReconstructOptions o;
  o.budget = 10;
  CHECK_THROWS_AS(reconstruct(bag, t, o), SearchBudgetExceeded);
}

TEST_CASE("reconstruction agrees with permutation search") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> labels{"f", "g", "h", "c", "d"};
  for (int trial = 0; trial < 150; ++trial) {
    CompatibilityTable t;
    std::bernoulli_distribution edge(0.35);
    for (std::size_t p = 0; p < 3; ++p) {
      const std::size_t slots = 1 + (trial + p) % 2;
      for (std::size_t s = 1; s <= slots; ++s) {
        for (const auto& c : labels) {
          if (edge(rng)) t.add_edge(labels[p], s, c);
        }
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
    std::vector<std::string> bag;
    for (int k = 0; k < 2 + trial % 4; ++k) bag.push_back(labels[pick(rng)]);
    const auto trees = all_trees(bag, t);
    const auto got = reconstruct(bag, t);
    CHECK(got.has_value() == (trees.size() == 1));
    if (got) {
      CHECK(*trees.begin() == got->to_string());
      CHECK(sorted(target_atoms(*got, {})) == sorted(bag));
    }
  }
}

TEST_CASE("safe spans on the extended running example") {
  const auto d = fixtures::running_example_extended();
  const auto dec = Decider::train(d, Mode::Ls);
  const auto cfg = words_only();
  const auto tokens = fixtures::words("area of Iowa and cities in Iowa");
  const auto spans = annotate_safe_spans(tokens, dec, cfg);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& s : spans) ranges.emplace_back(s.begin, s.end);
  CHECK(ranges == std::vector<std::pair<std::size_t, std::size_t>>{
                      {2, 3}, {6, 7}, {0, 2}, {4, 6}, {0, 3}, {4, 7}});
  const auto& tv = d.target_vocab();
  CHECK(spans[0].output == fixtures::bag("IA", tv));
  CHECK(spans[2].output == fixtures::bag("area", tv));
  CHECK(spans[3].output == fixtures::bag("city", tv));
  for (const auto& s : spans) {
    const std::vector<std::string> piece(tokens.begin() + s.begin, tokens.begin() + s.end);
    CHECK(dec.predict(featurize(piece, cfg, d.source_vocab())) == Prediction::answer(s.output));
  }
  CHECK(combine_spans(spans, 4) == fixtures::bag("area city IA IA", tv));
}

TEST_CASE("safe span edge cases") {
  const auto d = fixtures::running_example_extended();
  const auto dec = Decider::train(d, Mode::Ls);
  CHECK(annotate_safe_spans(fixtures::words("big red dog"), dec, words_only()).empty());
  const auto whole = fixtures::words("cities in Ohio");
  const auto spans = annotate_safe_spans(whole, dec, words_only());
  REQUIRE_FALSE(spans.empty());
  CHECK(spans.back().begin == 0);
  CHECK(spans.back().end == 3);
  CHECK(spans.back().output == fixtures::bag("city OH", d.target_vocab()));
  CHECK_THROWS_AS(annotate_safe_spans(whole, Decider::train(d, Mode::Ilp), words_only()), Error);
}

TEST_CASE("safe spans with bigrams reach the null token only at the end") {
  FeaturizerConfig cfg;
  Vocabulary src, tgt({"area", "city", "OH", "IA"});
  std::vector<Example> ex;
  for (const auto& [x, y] : std::vector<std::pair<std::string, std::string>>{
           {"Ohio", "OH"}, {"Iowa", "IA"}, {"area of Ohio", "area OH"}}) {
    auto in = featurize(fixtures::words(x), cfg, src, UnseenPolicy::Extend);
    ex.push_back({in, fixtures::bag(y, tgt)});
  }
  for (auto& e : ex) e.input = e.input.resized(src.size());
  const auto d = dataset_matrices(ex, src, tgt);
  const auto dec = Decider::train(d, Mode::Ls);
  const auto spans = annotate_safe_spans(fixtures::words("area of Iowa"), dec, cfg);
  // "Iowa <null>" is only formed for the span ending the sentence.
  bool iowa = false;
  for (const auto& s : spans) {
    if (s.begin == 2 && s.end == 3) iowa = s.output == fixtures::bag("IA", tgt);
  }
  CHECK(iowa);
}
