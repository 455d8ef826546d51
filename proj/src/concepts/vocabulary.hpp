#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/hash.hpp"
#include "common/string_hash.hpp"
#include "concepts/normalizer.hpp"
#include "corpus/corpus_io.hpp"

namespace comira {

using ConceptId = std::uint32_t;

// Dense lemma <-> id mapping with per-concept document frequencies.
//
// Ids follow descending document frequency, ties broken lexicographically.
// The fingerprint hashes the normalizer configuration, the document count and
// the sorted lemma list; every downstream artifact carries it.
class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;

  // Keeps lemmas whose document frequency is strictly greater than min_doc_freq.
  static ConceptVocabulary from_doc_freqs(std::vector<std::pair<std::string, std::uint64_t>> doc_freqs,
                                          std::uint64_t num_docs, std::uint64_t min_doc_freq,
                                          const NormalizerConfig& config);

  static Digest compute_fingerprint(const NormalizerConfig& config, std::uint64_t num_docs,
                                    std::vector<std::string> lemmas);

  // Text format: "#comira-vocab v1 num_docs=N min_doc_freq=k fingerprint=<hex>
  // concepts=n checksum=<16 hex>" then "lemma<TAB>doc_freq" per concept in id
  // order, every line '\n'-terminated. The checksum is the leading 8 bytes of
  // SHA-256 over the lemma lines; parse() also enforces id order.
  std::string serialize() const;
  static ConceptVocabulary parse(std::string_view text);
  void save(const std::string& path) const;
  static ConceptVocabulary load(const std::string& path);

  std::size_t size() const noexcept { return lemmas_.size(); }
  bool empty() const noexcept { return lemmas_.empty(); }
  const std::string& lemma(ConceptId id) const;
  std::optional<ConceptId> find(std::string_view lemma) const;
  ConceptId id(std::string_view lemma) const;  // throws Errc::unknown_concept
  std::uint64_t doc_freq(ConceptId id) const;
  std::span<const std::uint64_t> doc_freqs() const noexcept { return doc_freq_; }
  std::span<const std::string> lemmas() const noexcept { return lemmas_; }
  std::uint64_t num_docs() const noexcept { return num_docs_; }
  std::uint64_t min_doc_freq() const noexcept { return min_doc_freq_; }
  const Digest& fingerprint() const noexcept { return fingerprint_; }
  std::string fingerprint_hex() const { return to_hex(fingerprint_); }

  bool built_with(const NormalizerConfig& config) const;
  // Throws Errc::mismatch naming both fingerprints.
  void require_built_with(const NormalizerConfig& config) const;

  friend bool operator==(const ConceptVocabulary& a, const ConceptVocabulary& b) {
    return a.lemmas_ == b.lemmas_ && a.doc_freq_ == b.doc_freq_ && a.num_docs_ == b.num_docs_ &&
           a.min_doc_freq_ == b.min_doc_freq_ && a.fingerprint_ == b.fingerprint_;
  }

 private:
  void rebuild_index();

  std::vector<std::string> lemmas_;
  std::vector<std::uint64_t> doc_freq_;
  StringMap<ConceptId> index_;
  std::uint64_t num_docs_ = 0;
  std::uint64_t min_doc_freq_ = 0;
  Digest fingerprint_{};
};

// Streams the corpus once. Work is sharded across workers per batch and the
// partial counts are summed, so the result does not depend on `workers`.
// An empty corpus is an error; an empty vocabulary only logs a warning.
ConceptVocabulary build_vocabulary(const std::string& corpus_path, const CorpusFormat& format,
                                   const Normalizer& normalizer, std::uint64_t min_doc_freq, unsigned workers);
ConceptVocabulary build_vocabulary(std::span<const std::string> texts, const Normalizer& normalizer,
                                   std::uint64_t min_doc_freq, unsigned workers);

// Deduplicated lemmas of `text` in order of first appearance.
std::vector<std::string> concept_set(const Normalizer& normalizer, std::string_view text);

// Normalizer bound to a vocabulary whose fingerprint it has been checked against.
class ConceptExtractor {
 public:
  ConceptExtractor(const Normalizer& normalizer, const ConceptVocabulary& vocab);

  // Deduplicated in-vocabulary ids in order of first appearance, at most `cap`.
  // Returns true when the cap truncated the set.
  bool ids(std::string_view text, std::vector<ConceptId>& out,
           std::size_t cap = std::numeric_limits<std::size_t>::max()) const;
  std::vector<ConceptId> ids(std::string_view text) const;

  const Normalizer& normalizer() const noexcept { return normalizer_; }
  const ConceptVocabulary& vocab() const noexcept { return vocab_; }

 private:
  const Normalizer& normalizer_;
  const ConceptVocabulary& vocab_;
};

}  // namespace comira
