#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace comira {

struct EvalRecord {
  std::string example_id;
  double pmi = 0.0;
  double correctness = 0.0;  // in [0, 1]
  std::optional<std::string> predicted_answer;
  std::optional<bool> ground_truth_is_yes;
};

struct Bin {
  double pmi_mean = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;

  bool operator==(const Bin&) const = default;
};

enum class VqaMode { official, simple };

// Case-fold, punctuation to spaces, leading articles dropped, whitespace
// collapsed.
std::string normalize_vqa_answer(std::string_view answer);

// Official mode averages min(matches/3, 1) over every leave-one-out subset
// of the human answers. Fewer than four answers fall back to simple mode.
double vqa_accuracy(std::string_view prediction, std::span<const std::string> human_answers,
                    VqaMode mode = VqaMode::official);

bool topk_correct(std::span<const std::string> ranked, std::string_view label, std::size_t k);

// Equal-count bins over records stably sorted by pmi; bin i holds sorted
// positions [floor(i*n/B), floor((i+1)*n/B)).
std::vector<Bin> bin_accuracy(std::span<const EvalRecord> records, std::size_t num_bins);

// Sample Pearson correlation. Errc::undefined on zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// Mean correctness of the top ceil(f*n) records by pmi minus that of the
// bottom ceil(f*n); ties in pmi are ordered by example_id.
double accuracy_gap(std::span<const EvalRecord> records, double tail_fraction = 0.05);

// Records whose ground truth is "yes", with correctness replaced by whether
// the prediction normalizes to "yes". Errc::empty when none qualify.
std::vector<EvalRecord> yes_rate_records(std::span<const EvalRecord> records);

// Bins records whose ground truth is "yes" by pmi; the per-bin accuracy is
// the fraction of predictions that normalize to "yes".
std::vector<Bin> yes_rate_by_pmi(std::span<const EvalRecord> records, std::size_t num_bins);

}  // namespace comira
