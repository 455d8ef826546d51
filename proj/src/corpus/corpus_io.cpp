#include "corpus/corpus_io.hpp"

#include <charconv>

#include <json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace comira {

CorpusFormat CorpusFormat::parse(const std::string& spec) {
  auto parse_column = [&](std::string_view s) {
    std::size_t col = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), col);
    if (ec != std::errc() || p != s.data() + s.size())
      throw Error(Errc::invalid_argument, "bad column index in corpus format '" + spec + "'");
    return col;
  };
  if (spec == "plain") return plain();
  if (spec.rfind("tsv:", 0) == 0) return delimited(parse_column(std::string_view(spec).substr(4)), '\t');
  if (spec.rfind("json:", 0) == 0) return json(spec.substr(5));
  if (spec.rfind("delim:", 0) == 0) {
    auto rest = std::string_view(spec).substr(6);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos || rest.size() != colon + 2)
      throw Error(Errc::invalid_argument, "corpus format must be delim:<column>:<char>, got '" + spec + "'");
    return delimited(parse_column(rest.substr(0, colon)), rest[colon + 1]);
  }
  throw Error(Errc::invalid_argument, "unknown corpus format '" + spec + "'");
}

std::string CorpusFormat::describe() const {
  switch (kind) {
    case Kind::plain_lines: return "plain";
    case Kind::delimited:
      if (delimiter == '\t') return "tsv:" + std::to_string(column);
      return "delim:" + std::to_string(column) + ":" + std::string(1, delimiter);
    case Kind::json_records: return "json:" + field;
  }
  return "plain";
}

void CorpusFormat::validate() const {
  if (kind == Kind::json_records && field.empty())
    throw Error(Errc::invalid_argument, "json-records format needs a non-empty field name");
  if (kind == Kind::delimited && (delimiter == '\n' || delimiter == '\r'))
    throw Error(Errc::invalid_argument, "delimiter cannot be a line terminator");
}

CorpusReader::CorpusReader(const std::string& path, CorpusFormat format)
    : path_(path), format_(std::move(format)), in_(path, std::ios::binary) {
  format_.validate();
  if (!in_) throw Error(Errc::io, "cannot open corpus '" + path + "'");
}

bool CorpusReader::extract(const std::string& line, std::string& text) const {
  if (!is_valid_utf8(line)) return false;
  switch (format_.kind) {
    case CorpusFormat::Kind::plain_lines:
      text = line;
      return true;
    case CorpusFormat::Kind::delimited: {
      auto cols = split(line, format_.delimiter);
      if (format_.column >= cols.size()) return false;
      text.assign(cols[format_.column]);
      return true;
    }
    case CorpusFormat::Kind::json_records: {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) return false;
      auto it = j.find(format_.field);
      if (it == j.end() || !it->is_string()) return false;
      text = it->get<std::string>();
      return true;
    }
  }
  return false;
}

bool CorpusReader::next(CaptionRecord& out) {
  if (done_) return false;
  while (std::getline(in_, line_)) {
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    // blank lines carry no JSON object and are not records
    if (format_.kind == CorpusFormat::Kind::json_records && trim(line_).empty()) continue;
    if (extract(line_, out.text)) {
      out.doc_id = valid_++;
      return true;
    }
    ++skipped_;
  }
  done_ = true;
  if (in_.bad()) throw Error(Errc::io, "read error on corpus '" + path_ + "'");
  if (skipped_ * 2 > valid_ + skipped_) {
    throw Error(Errc::corrupt, "corpus '" + path_ + "' is corrupt: " + std::to_string(skipped_) + " of " +
                                   std::to_string(valid_ + skipped_) + " records malformed");
  }
  return false;
}

std::size_t CorpusReader::next_batch(std::vector<CaptionRecord>& out, std::size_t max) {
  std::size_t n = 0;
  CaptionRecord rec;
  while (n < max && next(rec)) {
    out.push_back(std::move(rec));
    ++n;
  }
  return n;
}

RecordCounts count_records(const std::string& path, const CorpusFormat& format) {
  CorpusReader reader(path, format);
  CaptionRecord rec;
  while (reader.next(rec)) {
  }
  return {reader.valid(), reader.skipped()};
}

}  // namespace comira
