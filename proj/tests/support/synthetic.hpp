#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "concepts/normalizer.hpp"
#include "concepts/vocabulary.hpp"

namespace synth {

// Alphabetic pseudo-words that the shipped normalizer leaves untouched: each
// candidate is checked to be a non-stopword fixed point of the lemmatizer.
inline std::vector<std::string> stable_words(std::size_t n, const comira::Normalizer& norm) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "m", "p", "t", "v", "z"};
  static const char* vowels[] = {"a", "o", "u", "i"};
  std::vector<std::string> out;
  for (std::size_t i = 0; out.size() < n; ++i) {
    std::string w = "q";
    std::size_t x = i;
    do {
      w += onsets[x % 10];
      x /= 10;
      w += vowels[x % 4];
      x /= 4;
    } while (x > 0);
    auto lemmas = norm.normalize(w);
    if (lemmas.size() == 1 && lemmas[0] == w) out.push_back(w);
  }
  return out;
}

struct Corpus {
  std::vector<std::string> words;                 // word index -> text
  std::vector<std::vector<std::size_t>> docs;     // word indices, duplicates allowed
  std::vector<std::string> texts;                 // one caption per doc
};

// Documents of 0..max_k words drawn from a Zipf-like distribution over
// vocab_size words, with occasional repeats.
inline Corpus make_corpus(std::size_t num_docs, std::size_t vocab_size, std::size_t max_k, std::uint64_t seed,
                          const comira::Normalizer& norm) {
  Corpus c;
  c.words = stable_words(vocab_size, norm);
  std::mt19937_64 gen(seed);
  std::vector<double> weights(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) weights[i] = 1.0 / (1.0 + static_cast<double>(i) * 0.05);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> len(0, max_k);
  c.docs.resize(num_docs);
  c.texts.resize(num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) {
    auto k = len(gen);
    for (std::size_t j = 0; j < k; ++j) {
      auto w = pick(gen);
      c.docs[d].push_back(w);
      c.texts[d] += c.words[w];
      c.texts[d] += (j % 3 == 2) ? ", the " : " ";
    }
  }
  return c;
}

// Vocabulary over every word that occurs, with document frequencies recounted
// here, plus the corpus re-expressed in vocabulary ids.
struct Indexed {
  std::shared_ptr<comira::ConceptVocabulary> vocab;
  std::vector<std::vector<comira::ConceptId>> id_docs;
};

inline Indexed index_corpus(const Corpus& c, const comira::Normalizer& norm) {
  std::map<std::string, std::uint64_t> df;
  for (const auto& d : c.docs) {
    std::set<std::size_t> s(d.begin(), d.end());
    for (auto w : s) ++df[c.words[w]];
  }
  std::vector<std::pair<std::string, std::uint64_t>> list(df.begin(), df.end());
  Indexed out;
  out.vocab = std::make_shared<comira::ConceptVocabulary>(
      comira::ConceptVocabulary::from_doc_freqs(std::move(list), c.docs.size(), 0, norm.config()));
  for (const auto& d : c.docs) {
    std::vector<comira::ConceptId> ids;
    for (auto w : d) ids.push_back(out.vocab->id(c.words[w]));
    out.id_docs.push_back(std::move(ids));
  }
  return out;
}

}  // namespace synth
