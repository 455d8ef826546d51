#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "concepts/normalizer.hpp"
#include "concepts/vocabulary.hpp"
#include "pmi/pmi_model.hpp"

namespace comira {

struct ClassEntry {
  std::string class_id;
  std::string class_name;
};

struct ConceptPairSpec {
  std::string accessory;
  std::string imagenet_concept;
  double pmi = 0.0;
  std::string imagenet_class_id;
  std::string class_name;

  bool operator==(const ConceptPairSpec&) const = default;
};

// Class list: one class per line, "<class_id>\t<class name>", or a bare name
// whose id is its zero-based line number. Of comma-separated synonyms only the
// first is used.
std::vector<ClassEntry> parse_class_list(std::string_view text);
std::vector<ClassEntry> load_class_list(const std::string& path);

// Category word of a class name: lemma of the last ASCII-letter run of the
// last whitespace token, lowercased. Empty when the name has no letters.
std::string category_of(std::string_view class_name, const Normalizer& normalizer);

// Category lemma -> first class (file order) that produced it.
std::map<std::string, ClassEntry> derive_categories(std::span<const ClassEntry> classes,
                                                    const Normalizer& normalizer);

// Every (accessory, category) pair with the category in the vocabulary and
// the accessory a vocabulary concept that is not a category, co-occurring or
// not. Ordered by category, then accessory. pmi is left at 0.
std::vector<ConceptPairSpec> select_candidate_pairs(const ConceptVocabulary& vocab,
                                                    const std::map<std::string, ClassEntry>& categories);

void fill_pmi(std::span<ConceptPairSpec> pairs, const PmiModel& model);

// CSV with header accessory,imagenet_concept,imagenet_class_id,class_name,pmi.
std::string pairs_csv(std::span<const ConceptPairSpec> pairs);
std::vector<ConceptPairSpec> parse_pairs_csv(std::string_view text);
void save_pairs(const std::string& path, std::span<const ConceptPairSpec> pairs);
std::vector<ConceptPairSpec> load_pairs(const std::string& path);

}  // namespace comira
