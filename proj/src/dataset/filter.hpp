#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/string_hash.hpp"
#include "dataset/generation.hpp"
#include "dataset/pairs.hpp"

namespace comira {

enum PosTag : unsigned { kNoun = 1, kVerb = 2, kAdjective = 4, kAdverb = 8 };

// Part-of-speech source for single words; returns a PosTag bitmask, 0 when
// the word is unknown.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual unsigned tags(std::string_view word) const = 0;
};

// Word list with part-of-speech tags ("word\ttags" lines, tags from n/v/a/r).
// Serves as the dictionary and as the default tagger.
class Lexicon : public PosTagger {
 public:
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::string& path);
  static std::string default_path();

  bool contains(std::string_view word) const { return words_.count(word) != 0; }
  unsigned tags(std::string_view word) const override;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  StringMap<unsigned> words_;
};

enum class FilterStage : unsigned { digit, dictionary, pos, literal, llm, llm_unparseable };
inline constexpr std::size_t kNumFilterStages = 6;
const char* filter_stage_name(FilterStage stage) noexcept;

struct FilterReport {
  std::size_t input_pairs = 0;
  std::size_t input_accessories = 0;
  std::array<std::size_t, kNumFilterStages> dropped{};  // distinct accessories per stage
  std::size_t kept_accessories = 0;
  std::size_t retryable_accessories = 0;
  bool llm_stage_run = false;
};

struct FilterResult {
  std::vector<ConceptPairSpec> kept;
  std::vector<ConceptPairSpec> retryable;  // LLM call failed; rerun later
  FilterReport report;
};

// Stages in order: digits, dictionary membership, noun/adjective tag, the
// literal words "photo" and "image", then the visualizability prompt when
// `llm` is given. Decisions are per distinct accessory.
FilterResult filter_accessories(std::span<const ConceptPairSpec> candidates, const Lexicon& dictionary,
                                const PosTagger& tagger, Generator* llm, unsigned max_in_flight = 4);

std::string filter_report_json(const FilterReport& report);

}  // namespace comira
