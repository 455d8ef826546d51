#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace comira {

struct CaptionRecord {
  std::uint64_t doc_id = 0;  // counts valid records only
  std::string text;
};

struct CorpusFormat {
  enum class Kind { plain_lines, delimited, json_records };

  Kind kind = Kind::plain_lines;
  std::size_t column = 0;      // delimited
  char delimiter = '\t';       // delimited
  std::string field = "caption";  // json_records

  static CorpusFormat plain() { return {}; }
  static CorpusFormat delimited(std::size_t column, char delimiter) {
    return {Kind::delimited, column, delimiter, {}};
  }
  static CorpusFormat json(std::string field) { return {Kind::json_records, 0, '\t', std::move(field)}; }

  // Parses "plain", "tsv:<col>", "delim:<col>:<char>" or "json:<field>".
  static CorpusFormat parse(const std::string& spec);
  std::string describe() const;
  void validate() const;
};

// Single-consumer stream of caption records in file order.
//
// Malformed records (invalid UTF-8, missing column or field, unparsable JSON)
// are skipped and counted. When the stream is exhausted and more than half of
// the records seen were malformed, next() throws Errc::corrupt.
class CorpusReader {
 public:
  CorpusReader(const std::string& path, CorpusFormat format);

  bool next(CaptionRecord& out);
  // Appends up to max records; returns the number appended.
  std::size_t next_batch(std::vector<CaptionRecord>& out, std::size_t max);

  std::uint64_t valid() const noexcept { return valid_; }
  std::uint64_t skipped() const noexcept { return skipped_; }

 private:
  bool extract(const std::string& line, std::string& text) const;

  std::string path_;
  CorpusFormat format_;
  std::ifstream in_;
  std::string line_;
  std::uint64_t valid_ = 0;
  std::uint64_t skipped_ = 0;
  bool done_ = false;
};

struct RecordCounts {
  std::uint64_t valid = 0;
  std::uint64_t skipped = 0;
};

RecordCounts count_records(const std::string& path, const CorpusFormat& format);

}  // namespace comira
