#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "concepts/vocabulary.hpp"
#include "cooccur/pair_table.hpp"
#include "corpus/corpus_io.hpp"

namespace comira {

enum class Normalization {
  paper,           // singles over |C|, pairs over C(|C|, 2)
  document_count,  // singles over |D| + alpha*|C|, pairs over |D| + alpha*C(|C|, 2)
};

struct SmoothingConfig {
  double alpha_pair = 1.0;
  double alpha_single = 1e4;
  Normalization mode = Normalization::paper;

  void validate() const;
};

const char* normalization_name(Normalization mode) noexcept;
Normalization parse_normalization(const std::string& name);

// C(n, k) as a double, computed by the running product (n-k+i)/i.
double binomial(double n, unsigned k) noexcept;

// Probabilities and PMI (natural log) over a vocabulary and its pair table.
// Immutable; concurrent readers need no synchronization.
class PmiModel {
 public:
  // Throws Errc::mismatch when the table was not counted with this vocabulary.
  PmiModel(std::shared_ptr<const ConceptVocabulary> vocab, std::shared_ptr<const PairCountTable> counts,
           SmoothingConfig smoothing);

  double single_prob(ConceptId c) const;
  double pair_prob(ConceptId a, ConceptId b) const;
  // -infinity when the smoothed pair probability is zero.
  double pmi(ConceptId a, ConceptId b) const;
  double pmi(std::string_view a, std::string_view b) const;

  // Smoothed probability that a document holds all of `concepts` given the
  // number of documents that do; normalized over C(|C|, n) in paper mode.
  double joint_prob(std::uint64_t joint_count, std::size_t n) const;

  const ConceptVocabulary& vocab() const noexcept { return *vocab_; }
  const PairCountTable& counts() const noexcept { return *counts_; }
  const SmoothingConfig& smoothing() const noexcept { return smoothing_; }
  std::size_t num_concepts() const noexcept { return vocab_->size(); }

 private:
  void check(ConceptId c) const;

  std::shared_ptr<const ConceptVocabulary> vocab_;
  std::shared_ptr<const PairCountTable> counts_;
  SmoothingConfig smoothing_;
  double single_denominator_;
  double pair_denominator_;
};

// Documents (in-memory id sets) holding every concept in `concepts`.
std::uint64_t count_joint(std::span<const std::vector<ConceptId>> docs, std::span<const ConceptId> concepts,
                          std::uint32_t per_doc_cap);

// Specific correlation: log p(c1..cn) / prod p(ci). The joint count comes
// from a scan of the corpus with the pair table's per-document cap, so n = 2
// reproduces pmi exactly on the corpus the table was counted from.
double specific_correlation(const PmiModel& model, std::uint64_t joint_count, std::span<const ConceptId> concepts);
double specific_correlation(const PmiModel& model, std::span<const std::vector<ConceptId>> docs,
                            std::span<const ConceptId> concepts);
double specific_correlation(const PmiModel& model, const std::string& corpus_path, const CorpusFormat& format,
                            const Normalizer& normalizer, std::span<const ConceptId> concepts, unsigned workers);

}  // namespace comira
