#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "common/string_hash.hpp"
#include "common/text.hpp"
#include "concepts/lemmatizer.hpp"

namespace comira {

struct NormalizerConfig {
  bool lowercase = true;
  // Query-time exemption for VQA text: "yes" and "no" survive stopword removal.
  // Not part of the build fingerprint.
  bool keep_yes_no = false;
  std::vector<std::string> stopwords;  // sorted, unique
  Lemmatizer lemmatizer = Lemmatizer::builtin();

  static NormalizerConfig defaults();
  // One lemma per line; '#' starts a comment line.
  static std::vector<std::string> parse_stopwords(std::string_view text);
  static std::vector<std::string> load_stopwords(const std::string& path);

  // Serialization covered by the vocabulary fingerprint (excludes keep_yes_no).
  std::string canonical() const;
};

// Tokenizes on runs of ASCII letters, lowercases, drops stopwords and
// lemmatizes. Pure: equal inputs give equal outputs.
class Normalizer {
 public:
  Normalizer() : Normalizer(NormalizerConfig::defaults()) {}
  explicit Normalizer(NormalizerConfig config);

  // Lemmas in order of appearance, duplicates retained.
  std::vector<std::string> normalize(std::string_view text) const;

  // Calls sink(lemma) for each surviving lemma in order of appearance.
  template <class Sink>
  void for_each_lemma(std::string_view text, Sink&& sink) const;

  bool is_stopword(std::string_view lemma) const;
  const NormalizerConfig& config() const noexcept { return config_; }

  // Same tables with the yes/no exemption switched on or off.
  Normalizer with_keep_yes_no(bool keep) const;

 private:
  bool drop(std::string_view token) const;

  NormalizerConfig config_;
  StringSet stop_;
};

template <class Sink>
void Normalizer::for_each_lemma(std::string_view text, Sink&& sink) const {
  std::string token;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && !is_ascii_alpha(text[i])) ++i;
    if (i >= n) break;
    std::size_t start = i;
    while (i < n && is_ascii_alpha(text[i])) ++i;
    token.assign(text.substr(start, i - start));
    if (config_.lowercase)
      for (auto& c : token) c = ascii_lower(c);
    if (drop(token)) continue;
    std::string lemma = config_.lemmatizer.lemma(token);
    if (drop(lemma)) continue;
    sink(std::move(lemma));
  }
}

}  // namespace comira
