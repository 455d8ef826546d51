#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace comira {

struct SuffixRule {
  std::string suffix;
  std::string replacement;
  std::size_t min_stem = 1;
  bool need_vowel = false;
  bool undouble = false;
  bool restore_e = false;
  std::vector<std::string> not_after;
  std::vector<std::string> e_after;
};

// Rule-table lemmatizer: whole-word exceptions plus ordered suffix rewrites,
// applied until a fixed point so that lemma(lemma(w)) == lemma(w).
class Lemmatizer {
 public:
  // Parses the table format documented in data/lemma_rules.txt.
  // Throws Errc::format on syntax errors, on a replacement that does not
  // shorten the word, or on an exception target that is not a fixed point.
  static Lemmatizer parse(std::string_view table);
  static Lemmatizer from_file(const std::string& path);
  static const Lemmatizer& builtin();

  std::string lemma(std::string_view word) const;

  // Stable serialization used in vocabulary fingerprints.
  std::string canonical() const;

  std::size_t num_rules() const noexcept { return rules_.size(); }
  std::size_t num_exceptions() const noexcept { return exceptions_.size(); }

 private:
  // Returns true and rewrites `word` when some rule applies.
  bool step(std::string& word) const;

  std::unordered_map<std::string, std::string> exceptions_;
  std::vector<SuffixRule> rules_;
};

}  // namespace comira
