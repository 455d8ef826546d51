#include "eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/text.hpp"

namespace comira {

std::string normalize_vqa_answer(std::string_view answer) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : answer) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u) || (u < 0x80 && std::ispunct(u))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ascii_lower(c));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  std::size_t first = 0;
  while (first < words.size() && (words[first] == "a" || words[first] == "an" || words[first] == "the")) ++first;
  std::string out;
  for (std::size_t i = first; i < words.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

double vqa_accuracy(std::string_view prediction, std::span<const std::string> human_answers, VqaMode mode) {
  if (human_answers.empty()) throw Error(Errc::invalid_argument, "VQA accuracy needs at least one human answer");
  const std::string pred = normalize_vqa_answer(prediction);
  std::vector<bool> match(human_answers.size());
  std::size_t matches = 0;
  for (std::size_t i = 0; i < human_answers.size(); ++i) {
    match[i] = normalize_vqa_answer(human_answers[i]) == pred;
    matches += match[i];
  }
  auto score = [](std::size_t m) { return std::min(static_cast<double>(m) / 3.0, 1.0); };
  if (mode == VqaMode::simple || human_answers.size() < 4) return score(matches);
  double total = 0.0;
  for (bool m : match) total += score(matches - (m ? 1 : 0));
  return total / static_cast<double>(human_answers.size());
}

bool topk_correct(std::span<const std::string> ranked, std::string_view label, std::size_t k) {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be at least 1");
  const auto n = std::min(k, ranked.size());
  return std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), label) !=
         ranked.begin() + static_cast<std::ptrdiff_t>(n);
}

std::vector<Bin> bin_accuracy(std::span<const EvalRecord> records, std::size_t num_bins) {
  if (num_bins < 2) throw Error(Errc::invalid_argument, "need at least 2 bins");
  const std::size_t n = records.size();
  if (n < num_bins)
    throw Error(Errc::invalid_argument,
                std::to_string(n) + " record(s) cannot fill " + std::to_string(num_bins) + " bins");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].pmi < records[b].pmi; });
  std::vector<Bin> bins(num_bins);
  for (std::size_t i = 0; i < num_bins; ++i) {
    const std::size_t begin = i * n / num_bins, end = (i + 1) * n / num_bins;
    double pmi = 0.0, acc = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      pmi += records[order[j]].pmi;
      acc += records[order[j]].correctness;
    }
    const auto m = static_cast<double>(end - begin);
    bins[i] = {pmi / m, acc / m, end - begin};
  }
  return bins;
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(Errc::invalid_argument, "pearson_r needs equally long x and y");
  if (xs.size() < 2) throw Error(Errc::invalid_argument, "pearson_r needs at least 2 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(Errc::undefined, "correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double accuracy_gap(std::span<const EvalRecord> records, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 0.5)
    throw Error(Errc::invalid_argument, "tail fraction must be in (0, 0.5]");
  const std::size_t n = records.size();
  // Guard against f*n landing a hair above an integer through rounding.
  const auto k = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n) - 1e-9));
  if (k == 0 || 2 * k > n)
    throw Error(Errc::invalid_argument, std::to_string(n) + " record(s) are too few for disjoint tails");
  std::vector<const EvalRecord*> order;
  order.reserve(n);
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const EvalRecord* a, const EvalRecord* b) {
    if (a->pmi != b->pmi) return a->pmi < b->pmi;
    return a->example_id < b->example_id;
  });
  double low = 0.0, high = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    low += order[i]->correctness;
    high += order[n - 1 - i]->correctness;
  }
  return (high - low) / static_cast<double>(k);
}

std::vector<EvalRecord> yes_rate_records(std::span<const EvalRecord> records) {
  std::vector<EvalRecord> yes;
  for (const auto& r : records) {
    if (r.ground_truth_is_yes != true || !r.predicted_answer) continue;
    EvalRecord y = r;
    y.correctness = normalize_vqa_answer(*r.predicted_answer) == "yes" ? 1.0 : 0.0;
    yes.push_back(std::move(y));
  }
  if (yes.empty()) throw Error(Errc::empty, "no records with a 'yes' ground truth and a prediction");
  return yes;
}

std::vector<Bin> yes_rate_by_pmi(std::span<const EvalRecord> records, std::size_t num_bins) {
  return bin_accuracy(yes_rate_records(records), num_bins);
}

}  // namespace comira
