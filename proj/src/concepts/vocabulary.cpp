#include <optional>
#include "concepts/vocabulary.hpp"

#include <algorithm>
#include <charconv>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"

namespace comira {

namespace {

constexpr std::string_view kHeaderPrefix = "#comira-vocab v1 ";
constexpr std::size_t kBatchRecords = 16384;

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw Error(Errc::format, std::string("vocabulary: bad ") + what + " '" + std::string(s) + "'");
  return v;
}

using DocFreqMap = StringMap<std::uint64_t>;

// Adds the per-document deduplicated lemmas of `text` to `df`.
void count_document(const Normalizer& normalizer, std::string_view text, DocFreqMap& df,
                    std::vector<std::string>& scratch) {
  scratch.clear();
  normalizer.for_each_lemma(text, [&](std::string lemma) { scratch.push_back(std::move(lemma)); });
  std::sort(scratch.begin(), scratch.end());
  scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
  for (auto& l : scratch) {
    auto it = df.find(l);
    if (it == df.end())
      df.emplace(std::move(l), 1);
    else
      ++it->second;
  }
}

void merge_into(DocFreqMap& into, DocFreqMap& from) {
  for (auto& [k, v] : from) into[k] += v;
  from.clear();
}

ConceptVocabulary finish(DocFreqMap&& df, std::uint64_t num_docs, std::uint64_t min_doc_freq,
                         const NormalizerConfig& config) {
  if (num_docs == 0) throw Error(Errc::empty, "cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::uint64_t>> pairs;
  pairs.reserve(df.size());
  for (auto& [k, v] : df)
    if (v > min_doc_freq) pairs.emplace_back(k, v);
  auto vocab = ConceptVocabulary::from_doc_freqs(std::move(pairs), num_docs, min_doc_freq, config);
  if (vocab.empty())
    log_warning("vocabulary is empty: no lemma has document frequency above " + std::to_string(min_doc_freq) +
                " in " + std::to_string(num_docs) + " documents");
  return vocab;
}

void require_min_df(std::uint64_t min_doc_freq) {
  if (min_doc_freq < 1) throw Error(Errc::invalid_argument, "min_doc_freq must be at least 1");
}

}  // namespace

ConceptVocabulary ConceptVocabulary::from_doc_freqs(std::vector<std::pair<std::string, std::uint64_t>> doc_freqs,
                                                    std::uint64_t num_docs, std::uint64_t min_doc_freq,
                                                    const NormalizerConfig& config) {
  std::erase_if(doc_freqs, [&](const auto& p) { return p.second <= min_doc_freq; });
  std::sort(doc_freqs.begin(), doc_freqs.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  ConceptVocabulary v;
  v.num_docs_ = num_docs;
  v.min_doc_freq_ = min_doc_freq;
  for (auto& [lemma, df] : doc_freqs) {
    if (df > num_docs) throw Error(Errc::invalid_argument, "doc_freq of '" + lemma + "' exceeds num_docs");
    v.lemmas_.push_back(std::move(lemma));
    v.doc_freq_.push_back(df);
  }
  if (v.lemmas_.size() > std::numeric_limits<ConceptId>::max())
    throw Error(Errc::invalid_argument, "vocabulary too large for 32-bit concept ids");
  v.rebuild_index();
  if (v.index_.size() != v.lemmas_.size()) throw Error(Errc::invalid_argument, "duplicate lemma in vocabulary");
  v.fingerprint_ = compute_fingerprint(config, num_docs, v.lemmas_);
  return v;
}

Digest ConceptVocabulary::compute_fingerprint(const NormalizerConfig& config, std::uint64_t num_docs,
                                              std::vector<std::string> lemmas) {
  std::sort(lemmas.begin(), lemmas.end());
  Sha256 h;
  h.update("comira-fingerprint v1\n");
  h.update(config.canonical());
  h.update("num_docs=" + std::to_string(num_docs) + "\nlemmas=" + std::to_string(lemmas.size()) + "\n");
  for (const auto& l : lemmas) {
    h.update(l);
    h.update("\n");
  }
  return h.finish();
}

void ConceptVocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(lemmas_.size());
  for (ConceptId i = 0; i < lemmas_.size(); ++i) index_.emplace(lemmas_[i], i);
}

namespace {

constexpr std::string_view kChecksumField = " checksum=";

// First 8 bytes of SHA-256 over the header up to the checksum field plus the
// body lines, as hex.
std::string vocab_checksum(std::string_view header_prefix, std::string_view body) {
  Sha256 h;
  h.update(header_prefix);
  h.update(body);
  auto d = h.finish();
  return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

}  // namespace

std::string ConceptVocabulary::serialize() const {
  std::string body;
  for (std::size_t i = 0; i < lemmas_.size(); ++i) {
    body += lemmas_[i];
    body += '\t';
    body += std::to_string(doc_freq_[i]);
    body += '\n';
  }
  std::string out(kHeaderPrefix);
  out += "num_docs=" + std::to_string(num_docs_) + " min_doc_freq=" + std::to_string(min_doc_freq_) +
         " fingerprint=" + fingerprint_hex() + " concepts=" + std::to_string(lemmas_.size());
  out += std::string(kChecksumField) + vocab_checksum(out, body) + "\n";
  return out + body;
}

ConceptVocabulary ConceptVocabulary::parse(std::string_view text) {
  if (text.empty() || text.back() != '\n') throw Error(Errc::format, "vocabulary: truncated file (no final newline)");
  const auto header_end = text.find('\n');
  const auto header = text.substr(0, header_end);
  const auto body = text.substr(header_end + 1);
  if (header.substr(0, kHeaderPrefix.size()) != kHeaderPrefix)
    throw Error(Errc::format, "vocabulary: missing '#comira-vocab v1' header");
  ConceptVocabulary v;
  std::optional<std::uint64_t> num_docs, min_df, concepts;
  std::string checksum;
  bool have_fp = false;
  for (auto field : split(header.substr(kHeaderPrefix.size()), ' ')) {
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::format, "vocabulary: bad header field");
    auto key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "num_docs") {
      num_docs = parse_u64(val, "num_docs");
    } else if (key == "min_doc_freq") {
      min_df = parse_u64(val, "min_doc_freq");
    } else if (key == "fingerprint") {
      v.fingerprint_ = digest_from_hex(val);
      have_fp = true;
    } else if (key == "concepts") {
      concepts = parse_u64(val, "concepts");
    } else if (key == "checksum") {
      checksum = std::string(val);
    }
  }
  if (!num_docs || !min_df || !have_fp || !concepts || checksum.empty())
    throw Error(Errc::format, "vocabulary: incomplete header");
  const auto covered = header.substr(0, header.rfind(kChecksumField));
  if (vocab_checksum(covered, body) != checksum) throw Error(Errc::corrupt, "vocabulary: checksum mismatch");
  v.num_docs_ = *num_docs;
  v.min_doc_freq_ = *min_df;
  std::size_t lineno = 1;
  const auto lines = body.empty() ? std::vector<std::string_view>{} : split(body.substr(0, body.size() - 1), '\n');
  for (auto line : lines) {
    ++lineno;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0)
      throw Error(Errc::format, "vocabulary: line " + std::to_string(lineno) + " is not 'lemma<TAB>doc_freq'");
    auto df = parse_u64(line.substr(tab + 1), "doc_freq");
    if (df > v.num_docs_ || df <= v.min_doc_freq_)
      throw Error(Errc::format, "vocabulary: doc_freq out of range on line " + std::to_string(lineno));
    std::string lemma(line.substr(0, tab));
    if (!v.lemmas_.empty()) {
      auto prev_df = v.doc_freq_.back();
      if (df > prev_df || (df == prev_df && lemma <= v.lemmas_.back()))
        throw Error(Errc::format, "vocabulary: line " + std::to_string(lineno) + " breaks id order");
    }
    v.lemmas_.push_back(std::move(lemma));
    v.doc_freq_.push_back(df);
  }
  if (v.lemmas_.size() != *concepts)
    throw Error(Errc::format, "vocabulary: header promises " + std::to_string(*concepts) + " concepts, file has " +
                                  std::to_string(v.lemmas_.size()));
  v.rebuild_index();
  if (v.index_.size() != v.lemmas_.size()) throw Error(Errc::format, "vocabulary: duplicate lemma");
  return v;
}

void ConceptVocabulary::save(const std::string& path) const { write_file_atomic(path, serialize()); }

ConceptVocabulary ConceptVocabulary::load(const std::string& path) { return parse(read_file(path)); }

const std::string& ConceptVocabulary::lemma(ConceptId id) const {
  if (id >= lemmas_.size()) throw Error(Errc::unknown_concept, "concept id " + std::to_string(id) + " out of range");
  return lemmas_[id];
}

std::optional<ConceptId> ConceptVocabulary::find(std::string_view lemma) const {
  auto it = index_.find(lemma);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ConceptId ConceptVocabulary::id(std::string_view lemma) const {
  auto found = find(lemma);
  if (!found) throw Error(Errc::unknown_concept, "unknown concept '" + std::string(lemma) + "'");
  return *found;
}

std::uint64_t ConceptVocabulary::doc_freq(ConceptId id) const {
  if (id >= doc_freq_.size())
    throw Error(Errc::unknown_concept, "concept id " + std::to_string(id) + " out of range");
  return doc_freq_[id];
}

bool ConceptVocabulary::built_with(const NormalizerConfig& config) const {
  return compute_fingerprint(config, num_docs_, lemmas_) == fingerprint_;
}

void ConceptVocabulary::require_built_with(const NormalizerConfig& config) const {
  auto expected = compute_fingerprint(config, num_docs_, lemmas_);
  if (expected != fingerprint_)
    throw Error(Errc::mismatch, "pipeline mismatch: vocabulary fingerprint " + fingerprint_hex() +
                                    " but normalizer config and contents give " + to_hex(expected));
}

ConceptVocabulary build_vocabulary(const std::string& corpus_path, const CorpusFormat& format,
                                   const Normalizer& normalizer, std::uint64_t min_doc_freq, unsigned workers) {
  require_min_df(min_doc_freq);
  workers = std::max(1u, workers);
  CorpusReader reader(corpus_path, format);
  std::vector<DocFreqMap> partial(workers);
  std::vector<CaptionRecord> batch;
  std::uint64_t num_docs = 0;
  while (true) {
    batch.clear();
    if (reader.next_batch(batch, kBatchRecords * workers) == 0) break;
    num_docs += batch.size();
    parallel_chunks(batch.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
      std::vector<std::string> scratch;
      for (std::size_t i = begin; i < end; ++i) count_document(normalizer, batch[i].text, partial[w], scratch);
    });
  }
  for (unsigned w = 1; w < workers; ++w) merge_into(partial[0], partial[w]);
  return finish(std::move(partial[0]), num_docs, min_doc_freq, normalizer.config());
}

ConceptVocabulary build_vocabulary(std::span<const std::string> texts, const Normalizer& normalizer,
                                   std::uint64_t min_doc_freq, unsigned workers) {
  require_min_df(min_doc_freq);
  workers = std::max(1u, workers);
  std::vector<DocFreqMap> partial(workers);
  parallel_chunks(texts.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<std::string> scratch;
    for (std::size_t i = begin; i < end; ++i) count_document(normalizer, texts[i], partial[w], scratch);
  });
  for (unsigned w = 1; w < workers; ++w) merge_into(partial[0], partial[w]);
  return finish(std::move(partial[0]), texts.size(), min_doc_freq, normalizer.config());
}

std::vector<std::string> concept_set(const Normalizer& normalizer, std::string_view text) {
  std::vector<std::string> out;
  normalizer.for_each_lemma(text, [&](std::string lemma) {
    if (std::find(out.begin(), out.end(), lemma) == out.end()) out.push_back(std::move(lemma));
  });
  return out;
}

ConceptExtractor::ConceptExtractor(const Normalizer& normalizer, const ConceptVocabulary& vocab)
    : normalizer_(normalizer), vocab_(vocab) {
  vocab_.require_built_with(normalizer_.config());
}

bool ConceptExtractor::ids(std::string_view text, std::vector<ConceptId>& out, std::size_t cap) const {
  out.clear();
  bool truncated = false;
  normalizer_.for_each_lemma(text, [&](const std::string& lemma) {
    auto id = vocab_.find(lemma);
    if (!id || std::find(out.begin(), out.end(), *id) != out.end()) return;
    if (out.size() >= cap) {
      truncated = true;
      return;
    }
    out.push_back(*id);
  });
  return truncated;
}

std::vector<ConceptId> ConceptExtractor::ids(std::string_view text) const {
  std::vector<ConceptId> out;
  ids(text, out);
  return out;
}

}  // namespace comira
