#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eval/metrics.hpp"
#include "scoring/score_file.hpp"

namespace comira {

enum class EvalTask { clf, vqa, vqa_yesno };

const char* eval_task_name(EvalTask task) noexcept;
EvalTask parse_eval_task(const std::string& name);

struct BinnedReport {
  std::string task;
  std::vector<Bin> bins;
  // Bin-level (pmi_mean vs accuracy) and record-level correlations; empty
  // when a side has zero variance.
  std::optional<double> pearson_r;
  std::optional<double> record_pearson_r;
  double accuracy_gap = 0.0;
  double tail_fraction = 0.05;
  std::uint64_t excluded = 0;  // undefined or non-finite pmi
  std::uint64_t records = 0;
  std::string fingerprint;  // of the vocabulary behind the scores, when known

  bool operator==(const BinnedReport&) const = default;
};

struct ReportOptions {
  std::size_t num_bins = 20;
  double tail_fraction = 0.05;
};

// Bins `records` by pmi and fills the correlations and the tail gap.
BinnedReport build_report(std::span<const EvalRecord> records, const ReportOptions& options,
                          std::uint64_t excluded = 0);

enum class ReportFormat { json, csv };
ReportFormat report_format_for(const std::string& path);

std::string report_json(const BinnedReport& report);
std::string report_csv(const BinnedReport& report);
void emit_report(const BinnedReport& report, const std::string& path, ReportFormat format);
BinnedReport parse_report_json(const std::string& text);
BinnedReport load_report(const std::string& path);

struct JoinOptions {
  EvalTask task = EvalTask::clf;
  std::size_t top_k = 1;  // clf
  VqaMode vqa_mode = VqaMode::official;
  bool exclude_yes_no = false;  // vqa: drop questions whose ground truth is yes or no
};

struct JoinResult {
  std::vector<EvalRecord> records;
  std::uint64_t excluded = 0;         // matched but with an undefined or non-finite pmi
  std::uint64_t unscored = 0;         // predictions with no score row
  std::uint64_t unpredicted = 0;      // score rows with no prediction
  std::uint64_t filtered = 0;         // dropped by the task's ground-truth filter
};

// Joins a prediction file with score rows on example_id.
JoinResult join_predictions(std::span<const ScoreRow> scores, const std::string& predictions_path,
                            const JoinOptions& options);

// Full report for a task: vqa-yesno bins the yes rate instead of accuracy.
BinnedReport evaluate(const JoinResult& joined, EvalTask task, const ReportOptions& options);

}  // namespace comira
