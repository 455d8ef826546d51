#include "cooccur/count_pairs.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <queue>

#include <unistd.h>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/parallel.hpp"

namespace comira {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kBatchRecords = 16384;
constexpr std::uint64_t kEmptyKey = ~std::uint64_t{0};  // lo < hi makes this key impossible

// Open-addressed (linear probing) counter keyed by packed pair.
class PairHashTable {
 public:
  explicit PairHashTable(std::size_t max_bytes) : max_slots_(std::max<std::size_t>(max_bytes / sizeof(Slot), 1024)) {
    reset(1024);
  }

  // Returns false when the table would have to grow past its budget.
  bool increment(std::uint64_t key) {
    std::size_t i = splitmix64(key) & mask_;
    while (true) {
      auto& s = slots_[i];
      if (s.key == key) {
        ++s.count;
        return true;
      }
      if (s.key == kEmptyKey) break;
      i = (i + 1) & mask_;
    }
    if ((size_ + 1) * 10 > slots_.size() * 7) {
      if (slots_.size() * 2 > max_slots_) return false;
      grow();
      return increment(key);
    }
    slots_[i] = {key, 1};
    ++size_;
    return true;
  }

  // Empties the table and returns its entries sorted by key.
  std::vector<PairEntry> drain_sorted() {
    std::vector<PairEntry> out;
    out.reserve(size_);
    for (auto& s : slots_) {
      if (s.key != kEmptyKey) out.push_back({s.key, s.count});
      s = Slot{};
    }
    size_ = 0;
    std::sort(out.begin(), out.end(), [](const PairEntry& a, const PairEntry& b) { return a.key < b.key; });
    return out;
  }

  std::size_t size() const noexcept { return size_; }

 private:
  struct Slot {
    std::uint64_t key = kEmptyKey;
    std::uint64_t count = 0;
  };

  void reset(std::size_t slots) {
    slots_.assign(slots, Slot{});
    mask_ = slots - 1;
    size_ = 0;
  }

  void grow() {
    std::vector<Slot> old;
    old.swap(slots_);
    reset(old.size() * 2);
    for (const auto& s : old) {
      if (s.key == kEmptyKey) continue;
      std::size_t i = splitmix64(s.key) & mask_;
      while (slots_[i].key != kEmptyKey) i = (i + 1) & mask_;
      slots_[i] = s;
      ++size_;
    }
  }

  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
  std::size_t max_slots_;
};

// Directory of sorted on-disk runs, removed on destruction.
class SpillDir {
 public:
  explicit SpillDir(std::string base) : base_(std::move(base)) {}
  ~SpillDir() {
    if (!dir_.empty()) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }
  SpillDir(const SpillDir&) = delete;
  SpillDir& operator=(const SpillDir&) = delete;

  std::string next_path() {
    std::lock_guard lock(mutex_);
    if (dir_.empty()) {
      fs::path base = base_.empty() ? fs::temp_directory_path() : fs::path(base_);
      static std::atomic<unsigned> serial{0};
      dir_ = base / ("comira-spill-" + std::to_string(::getpid()) + "-" + std::to_string(serial++));
      std::error_code ec;
      fs::create_directories(dir_, ec);
      if (ec) throw Error(Errc::io, "cannot create spill directory " + dir_.string() + ": " + ec.message());
    }
    return (dir_ / ("run-" + std::to_string(next_++) + ".bin")).string();
  }

 private:
  std::string base_;
  fs::path dir_;
  std::mutex mutex_;
  unsigned next_ = 0;
};

void write_run(const std::string& path, const std::vector<PairEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write spill run " + path);
  out.write(reinterpret_cast<const char*>(entries.data()), static_cast<std::streamsize>(entries.size() * sizeof(PairEntry)));
  if (!out) throw Error(Errc::io, "spill write failed for " + path);
}

// Sorted stream of entries from memory or from a run file.
class RunSource {
 public:
  explicit RunSource(std::vector<PairEntry> entries) : buffer_(std::move(entries)), in_memory_(true) {}
  explicit RunSource(const std::string& path) : file_(path, std::ios::binary) {
    if (!file_) throw Error(Errc::io, "cannot reopen spill run " + path);
    refill();
  }

  bool valid() const { return pos_ < buffer_.size(); }
  const PairEntry& head() const { return buffer_[pos_]; }
  void advance() {
    if (++pos_ == buffer_.size() && !in_memory_) refill();
  }

 private:
  void refill() {
    buffer_.resize(4096);
    file_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size() * sizeof(PairEntry)));
    buffer_.resize(static_cast<std::size_t>(file_.gcount()) / sizeof(PairEntry));
    pos_ = 0;
  }

  std::vector<PairEntry> buffer_;
  std::size_t pos_ = 0;
  std::ifstream file_;
  bool in_memory_ = false;
};

class Accumulator {
 public:
  Accumulator(std::size_t vocab_size, std::size_t budget_bytes, std::uint32_t cap, SpillDir& spill)
      : table_(budget_bytes), singles_(vocab_size, 0), cap_(cap), spill_(spill) {}

  // `ids` must already be deduplicated.
  void add_document(std::span<const ConceptId> ids) {
    ++stats_.documents;
    for (auto id : ids) ++singles_[id];
    std::size_t k = ids.size();
    if (k > cap_) {
      k = cap_;
      ++stats_.capped_documents;
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        auto key = pack_pair(ids[i], ids[j]);
        if (!table_.increment(key)) {
          spill();
          table_.increment(key);
        }
      }
    }
    stats_.pair_increments += static_cast<std::uint64_t>(k) * (k - (k > 0 ? 1 : 0)) / 2;
  }

  void spill() {
    auto path = spill_.next_path();
    write_run(path, table_.drain_sorted());
    runs_.push_back(std::move(path));
    ++stats_.spilled_runs;
  }

  std::vector<PairEntry> drain() { return table_.drain_sorted(); }
  const std::vector<std::uint64_t>& singles() const { return singles_; }
  const std::vector<std::string>& runs() const { return runs_; }
  const CountStats& stats() const { return stats_; }

 private:
  PairHashTable table_;
  std::vector<std::uint64_t> singles_;
  std::uint32_t cap_;
  SpillDir& spill_;
  std::vector<std::string> runs_;
  CountStats stats_;
};

struct CountJob {
  CountJob(const ConceptVocabulary& vocab, const CountOptions& options)
      : vocab(vocab), options(options), spill(options.spill_dir) {
    if (vocab.empty()) throw Error(Errc::empty, "cannot count pairs over an empty vocabulary");
    if (options.per_doc_cap < 2) throw Error(Errc::invalid_argument, "per-document cap must be at least 2");
    unsigned workers = std::max(1u, options.workers);
    std::size_t share = std::max<std::size_t>(options.memory_budget_bytes / workers, 1);
    for (unsigned w = 0; w < workers; ++w)
      accumulators.push_back(std::make_unique<Accumulator>(vocab.size(), share, options.per_doc_cap, spill));
  }

  PairCountTable finish(CountStats* stats) {
    if (documents == 0) throw Error(Errc::empty, "cannot count pairs over an empty corpus");
    std::vector<std::uint64_t> singles(vocab.size(), 0);
    CountStats total;
    std::vector<RunSource> sources;
    for (auto& acc : accumulators) {
      for (std::size_t i = 0; i < singles.size(); ++i) singles[i] += acc->singles()[i];
      for (const auto& run : acc->runs()) sources.emplace_back(run);
      sources.emplace_back(acc->drain());
      const auto& s = acc->stats();
      total.documents += s.documents;
      total.pair_increments += s.pair_increments;
      total.capped_documents += s.capped_documents;
      total.spilled_runs += s.spilled_runs;
    }
    using Cursor = std::pair<std::uint64_t, std::size_t>;
    std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
    for (std::size_t i = 0; i < sources.size(); ++i)
      if (sources[i].valid()) heap.emplace(sources[i].head().key, i);
    std::vector<PairEntry> pairs;
    while (!heap.empty()) {
      auto [key, i] = heap.top();
      heap.pop();
      auto c = sources[i].head().count;
      if (!pairs.empty() && pairs.back().key == key)
        pairs.back().count += c;
      else
        pairs.push_back({key, c});
      sources[i].advance();
      if (sources[i].valid()) heap.emplace(sources[i].head().key, i);
    }
    if (stats) *stats = total;
    std::uint8_t flags = total.capped_documents > 0 ? PairCountTable::kFlagCapped : 0;
    return PairCountTable(vocab.fingerprint(), documents, options.per_doc_cap, std::move(singles), std::move(pairs),
                          flags);
  }

  const ConceptVocabulary& vocab;
  const CountOptions& options;
  SpillDir spill;
  std::vector<std::unique_ptr<Accumulator>> accumulators;
  std::uint64_t documents = 0;
};

// A vocabulary built from another corpus, or from an older copy of this one,
// shows up as a different document count or document frequency.
void require_counted_from(const ConceptVocabulary& vocab, const PairCountTable& table) {
  std::string detail;
  if (table.num_docs() != vocab.num_docs()) {
    detail = "vocabulary has " + std::to_string(vocab.num_docs()) + " documents, corpus has " +
             std::to_string(table.num_docs());
  } else {
    for (ConceptId id = 0; id < vocab.size(); ++id) {
      if (table.single(id) == vocab.doc_freq(id)) continue;
      detail = "document frequency of '" + vocab.lemma(id) + "' is " + std::to_string(vocab.doc_freq(id)) +
               " in the vocabulary, " + std::to_string(table.single(id)) + " in the corpus";
      break;
    }
  }
  if (detail.empty()) return;
  throw Error(Errc::mismatch, "pipeline mismatch: vocabulary fingerprint " + vocab.fingerprint_hex() +
                                  " was not built from this corpus (" + detail + ")");
}

}  // namespace

PairCountTable count_pairs(const std::string& corpus_path, const CorpusFormat& format, const Normalizer& normalizer,
                           const ConceptVocabulary& vocab, const CountOptions& options, CountStats* stats) {
  ConceptExtractor extractor(normalizer, vocab);
  CountJob job(vocab, options);
  const auto workers = static_cast<unsigned>(job.accumulators.size());
  CorpusReader reader(corpus_path, format);
  std::vector<CaptionRecord> batch;
  while (true) {
    batch.clear();
    if (reader.next_batch(batch, kBatchRecords * workers) == 0) break;
    job.documents += batch.size();
    parallel_chunks(batch.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
      std::vector<ConceptId> ids;
      for (std::size_t i = begin; i < end; ++i) {
        extractor.ids(batch[i].text, ids);
        job.accumulators[w]->add_document(ids);
      }
    });
  }
  auto table = job.finish(stats);
  require_counted_from(vocab, table);
  return table;
}

PairCountTable count_pairs(std::span<const std::vector<ConceptId>> docs, const ConceptVocabulary& vocab,
                           const CountOptions& options, CountStats* stats) {
  CountJob job(vocab, options);
  const auto workers = static_cast<unsigned>(job.accumulators.size());
  job.documents = docs.size();
  parallel_chunks(docs.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<ConceptId> ids;
    for (std::size_t d = begin; d < end; ++d) {
      ids.clear();
      for (auto id : docs[d]) {
        if (id >= vocab.size()) throw Error(Errc::unknown_concept, "document references concept id outside vocabulary");
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
      }
      job.accumulators[w]->add_document(ids);
    }
  });
  return job.finish(stats);
}

}  // namespace comira
