#include "scoring/scoring.hpp"

#include <algorithm>
#include <map>

#include "common/error.hpp"
#include "common/text.hpp"

namespace comira {

std::string fold_answer(std::string_view answer) {
  std::string out;
  bool pending_space = false;
  for (char c : answer) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ascii_lower(c));
  }
  return out;
}

std::string derive_ground_truth(std::span<const std::string> human_answers) {
  if (human_answers.empty()) throw Error(Errc::invalid_argument, "cannot derive a ground truth from zero answers");
  std::map<std::string, std::size_t> tally;  // ordered: first max wins the lexicographic tie
  for (const auto& a : human_answers) ++tally[fold_answer(a)];
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

Scorer::Scorer(const PmiModel& model, const Normalizer& normalizer)
    : model_(model),
      caption_normalizer_(normalizer),
      vqa_normalizer_(normalizer.with_keep_yes_no(true)) {
  model_.vocab().require_built_with(normalizer.config());
}

std::optional<PmiScore> Scorer::score_concepts(std::span<const ConceptId> concepts, std::string example_id,
                                               bool audit) const {
  if (concepts.size() < 2) return std::nullopt;
  PmiScore s;
  s.example_id = std::move(example_id);
  double sum = 0.0;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    for (std::size_t j = i + 1; j < concepts.size(); ++j) {
      double v = model_.pmi(concepts[i], concepts[j]);
      sum += v;
      ++s.pair_count;
      if (audit) s.pairs.push_back({concepts[i], concepts[j], v});
    }
  }
  s.mean_pmi = sum / static_cast<double>(s.pair_count);
  return s;
}

namespace {

PmiScore require_defined(std::optional<PmiScore> s, std::string_view what) {
  if (!s) throw Error(Errc::undefined, std::string(what) + ": fewer than 2 in-vocabulary concepts");
  return std::move(*s);
}

}  // namespace

std::optional<PmiScore> Scorer::try_caption_mean_pmi(std::string_view text, std::string example_id,
                                                     bool audit) const {
  ConceptExtractor extractor(caption_normalizer_, model_.vocab());
  return score_concepts(extractor.ids(text), std::move(example_id), audit);
}

PmiScore Scorer::caption_mean_pmi(std::string_view text, std::string example_id, bool audit) const {
  return require_defined(try_caption_mean_pmi(text, std::move(example_id), audit), "caption score undefined");
}

double Scorer::key_pair_pmi(std::string_view accessory, std::string_view imagenet_concept) const {
  return model_.pmi(accessory, imagenet_concept);
}

std::vector<ConceptId> Scorer::vqa_concepts(const VqaExample& example) const {
  ConceptExtractor extractor(vqa_normalizer_, model_.vocab());
  auto ids = extractor.ids(example.question);
  const std::string truth =
      example.ground_truth.empty() ? derive_ground_truth(example.human_answers) : example.ground_truth;
  for (auto id : extractor.ids(truth))
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  return ids;
}

std::vector<ConceptId> Scorer::question_concepts(const VqaExample& example) const {
  ConceptExtractor extractor(vqa_normalizer_, model_.vocab());
  auto ids = extractor.ids(example.question);
  std::erase_if(ids, [&](ConceptId id) {
    const auto& l = model_.vocab().lemma(id);
    return l == "yes" || l == "no";
  });
  return ids;
}

std::optional<PmiScore> Scorer::try_vqa_example_pmi(const VqaExample& example, bool audit) const {
  return score_concepts(vqa_concepts(example), example.example_id, audit);
}

PmiScore Scorer::vqa_example_pmi(const VqaExample& example, bool audit) const {
  return require_defined(try_vqa_example_pmi(example, audit), "VQA score undefined");
}

std::optional<PmiScore> Scorer::try_question_only_pmi(const VqaExample& example, bool audit) const {
  return score_concepts(question_concepts(example), example.example_id, audit);
}

PmiScore Scorer::question_only_pmi(const VqaExample& example, bool audit) const {
  return require_defined(try_question_only_pmi(example, audit), "question-only score undefined");
}

}  // namespace comira
