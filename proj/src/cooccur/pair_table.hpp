#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/hash.hpp"
#include "concepts/vocabulary.hpp"

namespace comira {

// Canonical pair key: (lo << 32) | hi with lo < hi.
inline std::uint64_t pack_pair(ConceptId a, ConceptId b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
inline ConceptId pair_lo(std::uint64_t key) noexcept { return static_cast<ConceptId>(key >> 32); }
inline ConceptId pair_hi(std::uint64_t key) noexcept { return static_cast<ConceptId>(key & 0xffffffffu); }

struct PairEntry {
  std::uint64_t key = 0;  // pack_pair(lo, hi)
  std::uint64_t count = 0;
  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

// Sparse document co-occurrence counts for unordered concept pairs.
//
// Immutable after construction; pairs are sorted ascending by key and zero
// counts are never stored. Safe to share across threads for reads.
class PairCountTable {
 public:
  static constexpr std::uint32_t kDefaultDocCap = 256;
  static constexpr std::uint8_t kFlagCapped = 0x01;  // some document hit the per-document cap

  PairCountTable() = default;
  // Validates every structural invariant; throws Errc::corrupt on violation.
  PairCountTable(const Digest& fingerprint, std::uint64_t num_docs, std::uint32_t per_doc_cap,
                 std::vector<std::uint64_t> single_counts, std::vector<PairEntry> pairs, std::uint8_t flags = 0);

  std::uint64_t count(ConceptId a, ConceptId b) const;  // 0 when absent; a == b is an error
  std::uint64_t single(ConceptId c) const;
  std::uint64_t num_docs() const noexcept { return num_docs_; }
  std::size_t vocab_size() const noexcept { return singles_.size(); }
  std::size_t num_pairs() const noexcept { return pairs_.size(); }
  std::uint32_t per_doc_cap() const noexcept { return per_doc_cap_; }
  std::uint8_t flags() const noexcept { return flags_; }
  const Digest& fingerprint() const noexcept { return fingerprint_; }
  std::string fingerprint_hex() const { return to_hex(fingerprint_); }
  std::span<const PairEntry> pairs() const noexcept { return pairs_; }
  std::span<const std::uint64_t> single_counts() const noexcept { return singles_; }

  // Little-endian binary layout: "CMR1", u16 version, u8 flags, 32-byte
  // fingerprint, u64 num_docs, u32 vocab size, u32 per-doc cap, u64 singles,
  // u64 pair count, (u32 lo, u32 hi, u64 count) entries, 8-byte checksum
  // (leading bytes of SHA-256 over everything before it).
  std::string serialize() const;
  static PairCountTable parse(std::string_view bytes);
  void save(const std::string& path) const;
  static PairCountTable load(const std::string& path);

  // Throws Errc::mismatch unless the table and vocabulary come from the same pipeline.
  void require_matches(const ConceptVocabulary& vocab) const;

  friend bool operator==(const PairCountTable&, const PairCountTable&) = default;

 private:
  Digest fingerprint_{};
  std::uint64_t num_docs_ = 0;
  std::uint32_t per_doc_cap_ = kDefaultDocCap;
  std::uint8_t flags_ = 0;
  std::vector<std::uint64_t> singles_;
  std::vector<PairEntry> pairs_;
};

// Sums counts and document totals. All tables must share fingerprint,
// vocabulary size and per-document cap (Errc::mismatch otherwise).
PairCountTable merge(std::span<const PairCountTable> tables);

}  // namespace comira
