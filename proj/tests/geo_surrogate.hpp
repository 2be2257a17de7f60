#pragma once

// GeoQuery-sized stand-in: 600/280 templated questions over 172 word types
// and 57 predicates, entity names already replaced by their types. Every word maps
// to a fixed bag of predicates, so bigram atoms (plus the trailing null)
// admit an exact mapping; a few training rows get an extra predicate.

#include <random>
#include <string>
#include <vector>

#include "unanimous/data.hpp"

namespace fixtures {

struct GeoSurrogate {
  std::vector<unanimous::TokenExample> train;
  std::vector<unanimous::TokenExample> test;
  std::size_t corrupted = 0;
};

inline GeoSurrogate geo_surrogate(std::uint64_t seed, std::size_t n_train = 600,
                                  std::size_t n_test = 280, double noise_rate = 0.02) {
  std::mt19937_64 rng(seed);
  const std::size_t n_words = 172, n_preds = 57;
  std::vector<std::string> preds;
  for (std::size_t p = 0; p < n_preds; ++p) preds.push_back("p" + std::to_string(p));
  // Words 0..59 are function words mapping to nothing; the rest map to one
  // predicate, a few to two.
  std::vector<std::vector<std::string>> meaning(n_words);
  std::uniform_int_distribution<std::size_t> pick(0, n_preds - 1);
  for (std::size_t w = 60; w < n_words; ++w) {
    meaning[w].push_back(preds[pick(rng)]);
    if (w % 9 == 0) meaning[w].push_back(preds[pick(rng)]);
  }
  // Questions follow a few dozen templates: fixed words with slots, each
  // slot filled from a small word class. Phrasing is heavily reused, as in
  // the real corpus.
  const std::size_t n_templates = 30, n_classes = 12, class_size = 6;
  std::uniform_int_distribution<std::size_t> any_word(0, n_words - 1), cls(0, n_classes - 1),
      fill(0, class_size - 1), tlen(3, 8), nslots(1, 3);
  std::vector<std::vector<std::size_t>> classes(n_classes);
  for (auto& c : classes) {
    for (std::size_t k = 0; k < class_size; ++k) c.push_back(60 + any_word(rng) % (n_words - 60));
  }
  // Entries below n_words are fixed words; n_words + c is a slot of class c.
  std::vector<std::vector<std::size_t>> templates(n_templates);
  for (auto& t : templates) {
    for (std::size_t k = tlen(rng); k > 0; --k) t.push_back(any_word(rng));
    for (std::size_t k = nslots(rng); k > 0; --k) {
      std::uniform_int_distribution<std::size_t> at(0, t.size());
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(at(rng)), n_words + cls(rng));
    }
  }
  std::uniform_int_distribution<std::size_t> which(0, n_templates - 1);

  auto sentence = [&] {
    unanimous::TokenExample ex;
    std::vector<std::string> target;
    for (auto slot : templates[which(rng)]) {
      const auto w = slot < n_words ? slot : classes[slot - n_words][fill(rng)];
      ex.source.push_back("w" + std::to_string(w));
      target.insert(target.end(), meaning[w].begin(), meaning[w].end());
    }
    ex.target = std::move(target);
    return ex;
  };

  GeoSurrogate g;
  std::bernoulli_distribution noisy(noise_rate);
  for (std::size_t i = 0; i < n_train; ++i) {
    auto ex = sentence();
    if (noisy(rng)) {
      ex.target->push_back(preds[pick(rng)]);
      ++g.corrupted;
    }
    g.train.push_back(std::move(ex));
  }
  for (std::size_t i = 0; i < n_test; ++i) g.test.push_back(sentence());
  return g;
}

}  // namespace fixtures
