#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scoring/scoring.hpp"

namespace comira {

enum class ScoreKind { caption, vqa, vqa_question_only };

const char* score_kind_name(ScoreKind kind) noexcept;
ScoreKind parse_score_kind(const std::string& name);

struct ScoreInputOptions {
  ScoreKind kind = ScoreKind::caption;
  std::string id_field = "example_id";
  std::string text_field = "caption";  // caption kind only
  unsigned workers = 1;
  bool audit = false;  // also write the scored pairs
};

struct ScoreBatchStats {
  std::uint64_t examples = 0;
  std::uint64_t scored = 0;
  std::uint64_t undefined = 0;  // fewer than two concepts
  std::uint64_t non_finite = 0;
  std::uint64_t malformed = 0;  // lines that were not usable records
};

// One row of a score file. An undefined score has no value and pair_count 0.
struct ScoreRow {
  std::string example_id;
  std::optional<double> mean_pmi;
  std::size_t pair_count = 0;
};

// Metadata written next to a score file as "<path>.meta.json".
struct ScoreFileMeta {
  std::string fingerprint;
  ScoreKind kind = ScoreKind::caption;
  std::string normalization;
  double alpha_pair = 0.0;
  double alpha_single = 0.0;
};

std::string score_meta_path(const std::string& score_path);

// Scores a JSON-record file and writes one JSON line per input record, in
// input order. Caption records carry `text_field`; VQA records carry
// "question" and "human_answers" and optionally "ground_truth".
ScoreBatchStats score_file(const Scorer& scorer, const std::string& in_path, const std::string& out_path,
                           const ScoreInputOptions& options);

std::string score_row_json(const ScoreRow& row);
std::vector<ScoreRow> load_scores(const std::string& path);
std::optional<ScoreFileMeta> load_score_meta(const std::string& score_path);

}  // namespace comira
