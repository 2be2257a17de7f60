#include "unanimous/semparse.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <json.hpp>

namespace unanimous {

namespace {

std::vector<std::string> padded_tokens(std::span<const std::string> tokens,
                                       const FeaturizerConfig& cfg) {
  std::vector<std::string> out;
  out.reserve(tokens.size() + 1);
  for (const auto& tok : tokens) {
    auto it = cfg.entity_collapse.find(tok);
    out.push_back(it == cfg.entity_collapse.end() ? tok : it->second);
  }
  if (!cfg.null_token.empty()) out.push_back(cfg.null_token);
  return out;
}

// k-grams lying entirely inside padded[begin, end).
std::vector<std::string> kgrams_in(const std::vector<std::string>& padded,
                                   std::size_t begin, std::size_t end,
                                   std::size_t k) {
  std::vector<std::string> out;
  if (k == 0) throw DimensionMismatch("k-gram size must be positive");
  for (std::size_t i = begin; i + k <= end; ++i) {
    std::string gram = padded[i];
    for (std::size_t j = 1; j < k; ++j) {
      gram += ' ';
      gram += padded[i + j];
    }
    out.push_back(std::move(gram));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

class FormParser {
 public:
  explicit FormParser(std::string_view text) : text_(text) {}

  LogicalForm parse_all() {
    auto lf = term();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return lf;
  }

 private:
  LogicalForm term() {
    LogicalForm lf;
    lf.label = label();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      for (;;) {
        lf.args.push_back(term());
        skip_space();
        if (pos_ >= text_.size()) fail("unclosed argument list");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return lf;
  }

  std::string label() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           text_[pos_] != ',') {
      ++pos_;
    }
    auto out = trim(text_.substr(start, pos_ - start));
    if (out.empty()) fail("empty label");
    return out;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("logical form: " + what + " at offset " +
                      std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_variable(const std::string& arg) {
  return arg.size() == 1 && std::islower(static_cast<unsigned char>(arg[0]));
}

std::string renamed(const std::string& label, const TargetScheme& scheme) {
  auto it = scheme.rename.find(label);
  return it == scheme.rename.end() ? label : it->second;
}

void collect(const LogicalForm& lf, const TargetScheme& scheme,
             std::vector<std::string>& out) {
  auto label = renamed(lf.label, scheme);
  if (scheme.mode == SchemeMode::PredicatesOnly) label = strip_arg_position(label);
  out.push_back(std::move(label));
  for (const auto& a : lf.args) collect(a, scheme, out);
}

}  // namespace

std::vector<std::string> kgrams(std::span<const std::string> tokens,
                                const FeaturizerConfig& cfg) {
  const auto padded = padded_tokens(tokens, cfg);
  return kgrams_in(padded, 0, padded.size(), cfg.k);
}

CountVector featurize(std::span<const std::string> tokens,
                      const FeaturizerConfig& cfg, Vocabulary& vocab,
                      UnseenPolicy policy) {
  const auto grams = kgrams(tokens, cfg);
  return bag_from_tokens(grams, vocab, policy);
}

CountVector featurize(std::span<const std::string> tokens,
                      const FeaturizerConfig& cfg, const Vocabulary& vocab) {
  const auto grams = kgrams(tokens, cfg);
  return bag_for_query(grams, vocab);
}

LogicalForm LogicalForm::parse(std::string_view text) {
  return FormParser(text).parse_all();
}

std::string LogicalForm::to_string() const {
  if (args.empty()) return label;
  std::string out = label + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ',';
    out += args[i].to_string();
  }
  return out + ")";
}

std::size_t LogicalForm::size() const {
  std::size_t n = 1;
  for (const auto& a : args) n += a.size();
  return n;
}

std::vector<Conjunct> parse_conjunctive(std::string_view text) {
  std::vector<Conjunct> out;
  std::size_t depth = 0, start = 0;
  auto flush = [&](std::size_t end) {
    const auto piece = trim(text.substr(start, end - start));
    if (piece.empty()) throw FormatError("conjunctive form: empty conjunct");
    const auto lf = LogicalForm::parse(piece);
    Conjunct c{lf.label, {}};
    for (const auto& a : lf.args) {
      if (!a.args.empty()) throw FormatError("conjunctive form: nested term");
      c.args.push_back(a.label);
    }
    out.push_back(std::move(c));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      if (depth == 0) throw FormatError("conjunctive form: unbalanced ')'");
      --depth;
    } else if (text[i] == ',' && depth == 0) {
      flush(i);
      start = i + 1;
    }
  }
  if (depth != 0) throw FormatError("conjunctive form: unbalanced '('");
  flush(text.size());
  return out;
}

std::string strip_arg_position(const std::string& label) {
  const auto us = label.rfind('_');
  if (us == std::string::npos || us == 0 || us + 1 == label.size()) return label;
  for (std::size_t i = us + 1; i < label.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(label[i]))) return label;
  }
  return label.substr(0, us);
}

std::vector<std::string> target_atoms(const LogicalForm& lf,
                                      const TargetScheme& scheme) {
  std::vector<std::string> out;
  collect(lf, scheme, out);
  return out;
}

std::vector<std::string> target_atoms(std::span<const Conjunct> form,
                                      const TargetScheme& scheme) {
  std::vector<std::string> out;
  for (const auto& c : form) {
    auto pred = renamed(c.predicate, scheme);
    if (scheme.mode == SchemeMode::PredicatesOnly) pred = strip_arg_position(pred);
    out.push_back(std::move(pred));
    for (const auto& a : c.args) {
      if (!is_variable(a)) out.push_back(renamed(a, scheme));
    }
  }
  return out;
}

CountVector encode_targets(const LogicalForm& lf, const TargetScheme& scheme,
                           Vocabulary& vocab, UnseenPolicy policy) {
  const auto atoms = target_atoms(lf, scheme);
  return bag_from_tokens(atoms, vocab, policy);
}

void CompatibilityTable::add(const LogicalForm& lf) {
  for (std::size_t j = 0; j < lf.args.size(); ++j) {
    add_edge(lf.label, j + 1, lf.args[j].label);
    add(lf.args[j]);
  }
}

void CompatibilityTable::add_edge(const std::string& parent, std::size_t slot,
                                  const std::string& child) {
  if (slot == 0) throw DimensionMismatch("compatibility slots are 1-based");
  edges_.emplace(parent, slot, child);
  auto& a = arity_[parent];
  a = std::max(a, slot);
}

bool CompatibilityTable::allows(const std::string& parent, std::size_t slot,
                                const std::string& child) const {
  return edges_.count({parent, slot, child}) > 0;
}

std::size_t CompatibilityTable::arity(const std::string& label) const {
  auto it = arity_.find(label);
  return it == arity_.end() ? 0 : it->second;
}

CompatibilityTable CompatibilityTable::from_forms(std::span<const LogicalForm> forms) {
  CompatibilityTable table;
  for (const auto& lf : forms) table.add(lf);
  return table;
}

std::string CompatibilityTable::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [p, slot, c] : edges_) j.push_back({p, slot, c});
  return j.dump();
}

CompatibilityTable CompatibilityTable::from_json(const std::string& text) {
  CompatibilityTable table;
  try {
    for (const auto& e : nlohmann::json::parse(text)) {
      if (!e.is_array() || e.size() != 3) throw FormatError("edge must be [parent, slot, child]");
      table.add_edge(e[0].get<std::string>(), e[1].get<std::size_t>(),
                     e[2].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("compatibility table: ") + e.what());
  }
  return table;
}

std::optional<LogicalForm> reconstruct(std::span<const std::string> atoms,
                                       const CompatibilityTable& table,
                                       const ReconstructOptions& options) {
  std::map<std::string, std::size_t> bag;
  for (const auto& a : atoms) ++bag[a];
  std::vector<std::string> labels;
  std::vector<std::size_t> left, arity;
  for (const auto& [label, count] : bag) {
    labels.push_back(label);
    left.push_back(count);
    arity.push_back(table.arity(label));
  }
  std::size_t remaining = atoms.size();
  if (remaining == 0) return std::nullopt;

  std::vector<std::size_t> preorder;
  std::vector<std::pair<std::size_t, std::size_t>> open;  // (label, slot)
  std::vector<std::vector<std::size_t>> found;
  std::size_t steps = 0;

  auto place = [&](std::size_t c) {
    --left[c];
    --remaining;
    preorder.push_back(c);
    for (std::size_t s = arity[c]; s >= 1; --s) open.emplace_back(c, s);
  };
  auto unplace = [&](std::size_t c) {
    for (std::size_t s = 0; s < arity[c]; ++s) open.pop_back();
    preorder.pop_back();
    ++remaining;
    ++left[c];
  };

  auto search = [&](auto&& self) -> void {
    if (++steps > options.budget) {
      throw SearchBudgetExceeded("reconstruction search budget exhausted");
    }
    if (open.empty()) {
      if (remaining == 0) found.push_back(preorder);
      return;
    }
    if (open.size() > remaining) return;
    const auto slot = open.back();
    open.pop_back();
    for (std::size_t c = 0; c < labels.size() && found.size() < 2; ++c) {
      if (left[c] == 0 || !table.allows(labels[slot.first], slot.second, labels[c])) {
        continue;
      }
      place(c);
      self(self);
      unplace(c);
    }
    open.push_back(slot);
  };

  for (std::size_t r = 0; r < labels.size() && found.size() < 2; ++r) {
    place(r);
    search(search);
    unplace(r);
  }
  if (found.size() != 1) return std::nullopt;

  std::size_t at = 0;
  auto build = [&](auto&& self) -> LogicalForm {
    const auto c = found[0][at++];
    LogicalForm lf{labels[c], {}};
    for (std::size_t s = 0; s < arity[c]; ++s) lf.args.push_back(self(self));
    return lf;
  };
  return build(build);
}

std::optional<LogicalForm> reconstruct(const CountVector& bag,
                                       const Vocabulary& target_vocab,
                                       const CompatibilityTable& table,
                                       const ReconstructOptions& options) {
  const auto atoms = tokens_from_bag(bag, target_vocab);
  return reconstruct(atoms, table, options);
}

std::vector<SafeSpan> annotate_safe_spans(std::span<const std::string> tokens,
                                          const Decider& dec,
                                          const FeaturizerConfig& cfg) {
  if (dec.mode() != Mode::Ls) throw Error("safe spans are defined for LS deciders");
  const auto padded = padded_tokens(tokens, cfg);
  const std::size_t n = tokens.size();
  const auto& vocab = dec.dataset().source_vocab();
  std::vector<SafeSpan> out;
  for (std::size_t len = 1; len <= n; ++len) {
    for (std::size_t begin = 0; begin + len <= n; ++begin) {
      const std::size_t end = begin + len;
      const auto grams = kgrams_in(padded, begin, end == n ? padded.size() : end, cfg.k);
      if (grams.empty()) continue;
      const auto p = dec.predict(bag_for_query(grams, vocab));
      if (p.answered()) out.push_back({begin, end, p.output()});
    }
  }
  return out;
}

CountVector combine_spans(std::span<const SafeSpan> spans, std::size_t num_target) {
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto la = spans[a].end - spans[a].begin, lb = spans[b].end - spans[b].begin;
    if (la != lb) return la > lb;
    return spans[a].begin < spans[b].begin;
  });
  std::vector<bool> used;
  CountVector total(num_target);
  for (auto i : order) {
    const auto& sp = spans[i];
    if (used.size() < sp.end) used.resize(sp.end, false);
    bool clash = false;
    for (std::size_t t = sp.begin; t < sp.end && !clash; ++t) clash = used[t];
    if (clash) continue;
    for (std::size_t t = sp.begin; t < sp.end; ++t) used[t] = true;
    const auto y = sp.output.resized(num_target);
    for (std::size_t t = 0; t < num_target; ++t) total.counts[t] += y[t];
  }
  return total;
}

}  // namespace unanimous
