#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concepts/normalizer.hpp"
#include "concepts/vocabulary.hpp"
#include "pmi/pmi_model.hpp"

namespace comira {

struct ScoredPair {
  ConceptId a = 0;
  ConceptId b = 0;
  double pmi = 0.0;
};

struct PmiScore {
  std::string example_id;
  double mean_pmi = 0.0;  // nats
  std::size_t pair_count = 0;
  std::vector<ScoredPair> pairs;  // filled when auditing
};

struct VqaExample {
  std::string example_id;
  std::string question;
  std::vector<std::string> human_answers;
  std::string ground_truth;  // derived from human_answers when empty
};

// Case-folds and collapses whitespace.
std::string fold_answer(std::string_view answer);

// Mode of the folded answers; ties go to the lexicographically smallest.
std::string derive_ground_truth(std::span<const std::string> human_answers);

// Per-example PMI over an immutable model. Pure; callers may score examples
// from many threads at once.
class Scorer {
 public:
  // Throws Errc::mismatch when the normalizer does not match the vocabulary.
  Scorer(const PmiModel& model, const Normalizer& normalizer);

  // Mean PMI over all unordered pairs of the deduplicated in-vocabulary
  // concepts. Errc::undefined when fewer than two concepts remain.
  PmiScore caption_mean_pmi(std::string_view text, std::string example_id = {}, bool audit = false) const;
  std::optional<PmiScore> try_caption_mean_pmi(std::string_view text, std::string example_id = {},
                                               bool audit = false) const;

  double key_pair_pmi(std::string_view accessory, std::string_view imagenet_concept) const;

  // Concepts of question and ground-truth answer, with "yes"/"no" retained.
  PmiScore vqa_example_pmi(const VqaExample& example, bool audit = false) const;
  std::optional<PmiScore> try_vqa_example_pmi(const VqaExample& example, bool audit = false) const;

  // Concepts of the question alone, with "yes"/"no" removed.
  PmiScore question_only_pmi(const VqaExample& example, bool audit = false) const;
  std::optional<PmiScore> try_question_only_pmi(const VqaExample& example, bool audit = false) const;

  std::optional<PmiScore> score_concepts(std::span<const ConceptId> concepts, std::string example_id,
                                         bool audit) const;

  std::vector<ConceptId> vqa_concepts(const VqaExample& example) const;
  std::vector<ConceptId> question_concepts(const VqaExample& example) const;

  const PmiModel& model() const noexcept { return model_; }

 private:
  const PmiModel& model_;
  Normalizer caption_normalizer_;
  Normalizer vqa_normalizer_;
};

}  // namespace comira
