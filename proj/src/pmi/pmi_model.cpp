#include "pmi/pmi_model.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/parallel.hpp"

namespace comira {

void SmoothingConfig::validate() const {
  if (!(alpha_pair >= 0.0) || !(alpha_single >= 0.0) || !std::isfinite(alpha_pair) || !std::isfinite(alpha_single))
    throw Error(Errc::invalid_argument, "smoothing alphas must be finite and >= 0");
}

const char* normalization_name(Normalization mode) noexcept {
  return mode == Normalization::paper ? "paper" : "document-count";
}

Normalization parse_normalization(const std::string& name) {
  if (name == "paper") return Normalization::paper;
  if (name == "document-count" || name == "doccount") return Normalization::document_count;
  throw Error(Errc::invalid_argument, "normalization must be 'paper' or 'document-count', got '" + name + "'");
}

double binomial(double n, unsigned k) noexcept {
  if (k > n) return 0.0;
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

PmiModel::PmiModel(std::shared_ptr<const ConceptVocabulary> vocab, std::shared_ptr<const PairCountTable> counts,
                   SmoothingConfig smoothing)
    : vocab_(std::move(vocab)), counts_(std::move(counts)), smoothing_(smoothing) {
  if (!vocab_ || !counts_) throw Error(Errc::invalid_argument, "PmiModel needs a vocabulary and a pair table");
  smoothing_.validate();
  counts_->require_matches(*vocab_);
  const double c = static_cast<double>(vocab_->size());
  const double docs = static_cast<double>(counts_->num_docs());
  if (smoothing_.mode == Normalization::paper) {
    single_denominator_ = c;
    pair_denominator_ = binomial(c, 2);
  } else {
    single_denominator_ = docs + smoothing_.alpha_single * c;
    pair_denominator_ = docs + smoothing_.alpha_pair * binomial(c, 2);
  }
}

void PmiModel::check(ConceptId c) const {
  if (c >= vocab_->size()) throw Error(Errc::unknown_concept, "concept id " + std::to_string(c) + " not in vocabulary");
}

double PmiModel::single_prob(ConceptId c) const {
  check(c);
  return (static_cast<double>(counts_->single(c)) + smoothing_.alpha_single) / single_denominator_;
}

double PmiModel::pair_prob(ConceptId a, ConceptId b) const {
  check(a);
  check(b);
  if (a == b) throw Error(Errc::invalid_argument, "pair probability needs two distinct concepts");
  return (static_cast<double>(counts_->count(a, b)) + smoothing_.alpha_pair) / pair_denominator_;
}

double PmiModel::pmi(ConceptId a, ConceptId b) const {
  return std::log(pair_prob(a, b) / (single_prob(a) * single_prob(b)));
}

double PmiModel::pmi(std::string_view a, std::string_view b) const { return pmi(vocab_->id(a), vocab_->id(b)); }

double PmiModel::joint_prob(std::uint64_t joint_count, std::size_t n) const {
  const double c = static_cast<double>(vocab_->size());
  const double combos = binomial(c, static_cast<unsigned>(n));
  const double denom = smoothing_.mode == Normalization::paper
                           ? combos
                           : static_cast<double>(counts_->num_docs()) + smoothing_.alpha_pair * combos;
  return (static_cast<double>(joint_count) + smoothing_.alpha_pair) / denom;
}

namespace {

void require_concept_set(const PmiModel& model, std::span<const ConceptId> concepts) {
  if (concepts.size() < 2) throw Error(Errc::invalid_argument, "specific correlation needs at least 2 concepts");
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    if (concepts[i] >= model.num_concepts())
      throw Error(Errc::unknown_concept, "concept id " + std::to_string(concepts[i]) + " not in vocabulary");
    for (std::size_t j = 0; j < i; ++j)
      if (concepts[i] == concepts[j]) throw Error(Errc::invalid_argument, "specific correlation concepts must be distinct");
  }
}

bool holds_all(std::span<const ConceptId> doc, std::span<const ConceptId> concepts) {
  for (auto c : concepts)
    if (std::find(doc.begin(), doc.end(), c) == doc.end()) return false;
  return true;
}

// First `cap` distinct ids of a document in order of appearance.
std::span<const ConceptId> capped_unique(std::span<const ConceptId> doc, std::uint32_t cap,
                                         std::vector<ConceptId>& scratch) {
  scratch.clear();
  for (auto id : doc) {
    if (scratch.size() >= cap) break;
    if (std::find(scratch.begin(), scratch.end(), id) == scratch.end()) scratch.push_back(id);
  }
  return scratch;
}

}  // namespace

std::uint64_t count_joint(std::span<const std::vector<ConceptId>> docs, std::span<const ConceptId> concepts,
                          std::uint32_t per_doc_cap) {
  std::uint64_t n = 0;
  std::vector<ConceptId> scratch;
  for (const auto& doc : docs)
    if (holds_all(capped_unique(doc, per_doc_cap, scratch), concepts)) ++n;
  return n;
}

double specific_correlation(const PmiModel& model, std::uint64_t joint_count, std::span<const ConceptId> concepts) {
  require_concept_set(model, concepts);
  double independent = 1.0;
  for (auto c : concepts) independent *= model.single_prob(c);
  return std::log(model.joint_prob(joint_count, concepts.size()) / independent);
}

double specific_correlation(const PmiModel& model, std::span<const std::vector<ConceptId>> docs,
                            std::span<const ConceptId> concepts) {
  require_concept_set(model, concepts);
  return specific_correlation(model, count_joint(docs, concepts, model.counts().per_doc_cap()), concepts);
}

double specific_correlation(const PmiModel& model, const std::string& corpus_path, const CorpusFormat& format,
                            const Normalizer& normalizer, std::span<const ConceptId> concepts, unsigned workers) {
  require_concept_set(model, concepts);
  ConceptExtractor extractor(normalizer, model.vocab());
  workers = std::max(1u, workers);
  const auto cap = model.counts().per_doc_cap();
  CorpusReader reader(corpus_path, format);
  std::vector<CaptionRecord> batch;
  std::vector<std::uint64_t> partial(workers, 0);
  while (true) {
    batch.clear();
    if (reader.next_batch(batch, 16384 * workers) == 0) break;
    parallel_chunks(batch.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
      std::vector<ConceptId> ids;
      for (std::size_t i = begin; i < end; ++i) {
        extractor.ids(batch[i].text, ids, cap);
        if (holds_all(ids, concepts)) ++partial[w];
      }
    });
  }
  std::uint64_t joint = 0;
  for (auto p : partial) joint += p;
  return specific_correlation(model, joint, concepts);
}

}  // namespace comira
