#include "cooccur/pair_table.hpp"

#include <algorithm>
#include <cstring>
#include <queue>

#include "common/error.hpp"
#include "common/text.hpp"

namespace comira {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'R', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 32 + 8 + 4 + 4;
constexpr std::size_t kEntryBytes = 16;
constexpr std::size_t kChecksumBytes = 8;

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  template <class T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(Errc::format, "pair table: truncated file");
  }
  template <class T>
  T le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

void checksum(std::string_view bytes, std::uint8_t out[kChecksumBytes]) {
  auto d = sha256(bytes);
  std::memcpy(out, d.data(), kChecksumBytes);
}

}  // namespace

PairCountTable::PairCountTable(const Digest& fingerprint, std::uint64_t num_docs, std::uint32_t per_doc_cap,
                               std::vector<std::uint64_t> single_counts, std::vector<PairEntry> pairs,
                               std::uint8_t flags)
    : fingerprint_(fingerprint),
      num_docs_(num_docs),
      per_doc_cap_(per_doc_cap),
      flags_(flags),
      singles_(std::move(single_counts)),
      pairs_(std::move(pairs)) {
  auto bad = [](const std::string& why) { throw Error(Errc::corrupt, "pair table invariant violated: " + why); };
  for (auto s : singles_)
    if (s > num_docs_) bad("single count exceeds num_docs");
  const auto n = singles_.size();
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& e = pairs_[i];
    auto lo = pair_lo(e.key), hi = pair_hi(e.key);
    if (lo >= hi) bad("pair key not canonical");
    if (hi >= n) bad("pair id outside vocabulary");
    if (e.count == 0) bad("zero count stored");
    if (e.count > std::min(singles_[lo], singles_[hi])) bad("pair count exceeds a single count");
    if (i > 0 && pairs_[i - 1].key >= e.key) bad("pairs not strictly sorted");
  }
}

std::uint64_t PairCountTable::count(ConceptId a, ConceptId b) const {
  if (a == b) throw Error(Errc::invalid_argument, "pair query needs two distinct concepts");
  if (a >= singles_.size() || b >= singles_.size())
    throw Error(Errc::unknown_concept, "concept id outside the pair table's vocabulary");
  auto key = pack_pair(a, b);
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                             [](const PairEntry& e, std::uint64_t k) { return e.key < k; });
  return (it != pairs_.end() && it->key == key) ? it->count : 0;
}

std::uint64_t PairCountTable::single(ConceptId c) const {
  if (c >= singles_.size()) throw Error(Errc::unknown_concept, "concept id outside the pair table's vocabulary");
  return singles_[c];
}

std::string PairCountTable::serialize() const {
  ByteWriter w;
  w.str().reserve(kHeaderBytes + singles_.size() * 8 + 8 + pairs_.size() * kEntryBytes + kChecksumBytes);
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kVersion);
  w.le<std::uint8_t>(flags_);
  w.bytes(fingerprint_.data(), fingerprint_.size());
  w.le<std::uint64_t>(num_docs_);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(singles_.size()));
  w.le<std::uint32_t>(per_doc_cap_);
  for (auto s : singles_) w.le<std::uint64_t>(s);
  w.le<std::uint64_t>(pairs_.size());
  for (const auto& e : pairs_) {
    w.le<std::uint32_t>(pair_lo(e.key));
    w.le<std::uint32_t>(pair_hi(e.key));
    w.le<std::uint64_t>(e.count);
  }
  std::uint8_t sum[kChecksumBytes];
  checksum(w.str(), sum);
  w.bytes(sum, kChecksumBytes);
  return std::move(w.str());
}

PairCountTable PairCountTable::parse(std::string_view bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::format, "pair table: bad magic (not a CMR1 file)");
  auto version = r.le<std::uint16_t>();
  if (version != kVersion) throw Error(Errc::format, "pair table: unsupported version " + std::to_string(version));
  auto flags = r.le<std::uint8_t>();
  Digest fp;
  r.bytes(fp.data(), fp.size());
  auto num_docs = r.le<std::uint64_t>();
  auto vocab_size = r.le<std::uint32_t>();
  auto cap = r.le<std::uint32_t>();
  r.need(static_cast<std::size_t>(vocab_size) * 8);
  std::vector<std::uint64_t> singles(vocab_size);
  for (auto& s : singles) s = r.le<std::uint64_t>();
  auto num_pairs = r.le<std::uint64_t>();
  if (num_pairs > (bytes.size() - r.pos()) / kEntryBytes) throw Error(Errc::format, "pair table: truncated file");
  const std::size_t expected = r.pos() + num_pairs * kEntryBytes + kChecksumBytes;
  if (bytes.size() < expected) throw Error(Errc::format, "pair table: truncated file");
  if (bytes.size() > expected) throw Error(Errc::format, "pair table: trailing bytes after checksum");
  std::uint8_t sum[kChecksumBytes];
  checksum(bytes.substr(0, expected - kChecksumBytes), sum);
  if (std::memcmp(sum, bytes.data() + expected - kChecksumBytes, kChecksumBytes) != 0)
    throw Error(Errc::corrupt, "pair table: checksum mismatch");
  std::vector<PairEntry> pairs(num_pairs);
  for (auto& e : pairs) {
    auto lo = r.le<std::uint32_t>();
    auto hi = r.le<std::uint32_t>();
    if (lo >= hi) throw Error(Errc::corrupt, "pair table: non-canonical pair entry");
    e.key = pack_pair(lo, hi);
    e.count = r.le<std::uint64_t>();
  }
  return PairCountTable(fp, num_docs, cap, std::move(singles), std::move(pairs), flags);
}

void PairCountTable::save(const std::string& path) const { write_file_atomic(path, serialize()); }

PairCountTable PairCountTable::load(const std::string& path) { return parse(read_file(path)); }

void PairCountTable::require_matches(const ConceptVocabulary& vocab) const {
  if (fingerprint_ != vocab.fingerprint())
    throw Error(Errc::mismatch, "pipeline mismatch: pair table fingerprint " + fingerprint_hex() +
                                    " != vocabulary fingerprint " + vocab.fingerprint_hex());
  if (singles_.size() != vocab.size())
    throw Error(Errc::mismatch, "pipeline mismatch: pair table covers " + std::to_string(singles_.size()) +
                                    " concepts, vocabulary has " + std::to_string(vocab.size()));
}

PairCountTable merge(std::span<const PairCountTable> tables) {
  if (tables.empty()) throw Error(Errc::invalid_argument, "merge needs at least one table");
  const auto& first = tables.front();
  std::vector<std::uint64_t> singles(first.vocab_size(), 0);
  std::uint64_t num_docs = 0;
  std::uint8_t flags = 0;
  for (const auto& t : tables) {
    if (t.fingerprint() != first.fingerprint())
      throw Error(Errc::mismatch, "pipeline mismatch: cannot merge tables with fingerprints " +
                                      first.fingerprint_hex() + " and " + t.fingerprint_hex());
    if (t.vocab_size() != first.vocab_size() || t.per_doc_cap() != first.per_doc_cap())
      throw Error(Errc::mismatch, "cannot merge tables with different vocabulary size or per-document cap");
    num_docs += t.num_docs();
    flags |= t.flags();
    for (std::size_t i = 0; i < singles.size(); ++i) singles[i] += t.single_counts()[i];
  }
  // k-way merge of sorted entry lists
  using Cursor = std::pair<std::uint64_t, std::size_t>;  // (key, table index)
  std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
  std::vector<std::size_t> pos(tables.size(), 0);
  for (std::size_t t = 0; t < tables.size(); ++t)
    if (!tables[t].pairs().empty()) heap.emplace(tables[t].pairs()[0].key, t);
  std::vector<PairEntry> out;
  while (!heap.empty()) {
    auto [key, t] = heap.top();
    heap.pop();
    auto c = tables[t].pairs()[pos[t]].count;
    if (!out.empty() && out.back().key == key)
      out.back().count += c;
    else
      out.push_back({key, c});
    if (++pos[t] < tables[t].pairs().size()) heap.emplace(tables[t].pairs()[pos[t]].key, t);
  }
  return PairCountTable(first.fingerprint(), num_docs, first.per_doc_cap(), std::move(singles), std::move(out), flags);
}

}  // namespace comira
