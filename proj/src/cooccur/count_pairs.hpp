#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "concepts/vocabulary.hpp"
#include "cooccur/pair_table.hpp"
#include "corpus/corpus_io.hpp"

namespace comira {

struct CountOptions {
  unsigned workers = 1;
  std::uint32_t per_doc_cap = PairCountTable::kDefaultDocCap;
  // Total in-memory budget for the worker hash tables; a worker whose table
  // would outgrow its share spills a sorted run to disk.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  std::string spill_dir;  // empty: system temp directory
};

struct CountStats {
  std::uint64_t documents = 0;
  std::uint64_t pair_increments = 0;  // sum of k(k-1)/2 over documents
  std::uint64_t capped_documents = 0;
  std::uint64_t spilled_runs = 0;
};

// Counts, for every unordered pair of in-vocabulary concepts, the documents
// whose deduplicated concept set holds both. The result does not depend on
// the worker count.
PairCountTable count_pairs(const std::string& corpus_path, const CorpusFormat& format, const Normalizer& normalizer,
                           const ConceptVocabulary& vocab, const CountOptions& options, CountStats* stats = nullptr);

// Same over documents already reduced to concept ids (duplicates allowed;
// each document is deduplicated and capped in first-occurrence order).
PairCountTable count_pairs(std::span<const std::vector<ConceptId>> docs, const ConceptVocabulary& vocab,
                           const CountOptions& options, CountStats* stats = nullptr);

}  // namespace comira
