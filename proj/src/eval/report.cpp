#include "eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/text.hpp"
#include "scoring/scoring.hpp"

namespace comira {

using json = nlohmann::json;

const char* eval_task_name(EvalTask task) noexcept {
  switch (task) {
    case EvalTask::clf: return "clf";
    case EvalTask::vqa: return "vqa";
    case EvalTask::vqa_yesno: return "vqa-yesno";
  }
  return "clf";
}

EvalTask parse_eval_task(const std::string& name) {
  if (name == "clf") return EvalTask::clf;
  if (name == "vqa") return EvalTask::vqa;
  if (name == "vqa-yesno") return EvalTask::vqa_yesno;
  throw Error(Errc::invalid_argument, "task must be clf, vqa or vqa-yesno, got '" + name + "'");
}

namespace {

std::optional<double> try_pearson(std::span<const double> xs, std::span<const double> ys) {
  try {
    return pearson_r(xs, ys);
  } catch (const Error& e) {
    if (e.code() != Errc::undefined) throw;
    return std::nullopt;
  }
}

}  // namespace

BinnedReport build_report(std::span<const EvalRecord> records, const ReportOptions& options, std::uint64_t excluded) {
  BinnedReport r;
  r.bins = bin_accuracy(records, options.num_bins);
  r.tail_fraction = options.tail_fraction;
  r.accuracy_gap = accuracy_gap(records, options.tail_fraction);
  r.excluded = excluded;
  r.records = records.size();

  std::vector<double> xs, ys;
  for (const auto& b : r.bins) {
    xs.push_back(b.pmi_mean);
    ys.push_back(b.accuracy);
  }
  r.pearson_r = try_pearson(xs, ys);
  xs.clear();
  ys.clear();
  for (const auto& rec : records) {
    xs.push_back(rec.pmi);
    ys.push_back(rec.correctness);
  }
  r.record_pearson_r = try_pearson(xs, ys);
  return r;
}

ReportFormat report_format_for(const std::string& path) {
  return path.size() >= 4 && to_lower_ascii(path.substr(path.size() - 4)) == ".csv" ? ReportFormat::csv
                                                                                     : ReportFormat::json;
}

std::string report_json(const BinnedReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json bins = json::array();
  for (const auto& b : report.bins) bins.push_back({{"pmi_mean", b.pmi_mean}, {"accuracy", b.accuracy}, {"n", b.n}});
  json j = {{"task", report.task},
            {"bins", std::move(bins)},
            {"pearson_r", opt(report.pearson_r)},
            {"record_pearson_r", opt(report.record_pearson_r)},
            {"accuracy_gap", report.accuracy_gap},
            {"tail_fraction", report.tail_fraction},
            {"excluded", report.excluded},
            {"records", report.records},
            {"fingerprint", report.fingerprint}};
  return j.dump(2) + "\n";
}

std::string report_csv(const BinnedReport& report) {
  std::string out = "bin_index,pmi_mean,accuracy,n\n";
  char buf[128];
  for (std::size_t i = 0; i < report.bins.size(); ++i) {
    const auto& b = report.bins[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu\n", i, b.pmi_mean, b.accuracy, b.n);
    out += buf;
  }
  return out;
}

void emit_report(const BinnedReport& report, const std::string& path, ReportFormat format) {
  write_file_atomic(path, format == ReportFormat::csv ? report_csv(report) : report_json(report));
}

BinnedReport parse_report_json(const std::string& text) {
  try {
    auto j = json::parse(text);
    auto opt = [&](const char* key) -> std::optional<double> {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) return std::nullopt;
      return it->get<double>();
    };
    BinnedReport r;
    r.task = j.value("task", "");
    for (const auto& b : j.at("bins"))
      r.bins.push_back({b.at("pmi_mean").get<double>(), b.at("accuracy").get<double>(), b.at("n").get<std::size_t>()});
    r.pearson_r = opt("pearson_r");
    r.record_pearson_r = opt("record_pearson_r");
    r.accuracy_gap = j.at("accuracy_gap").get<double>();
    r.tail_fraction = j.at("tail_fraction").get<double>();
    r.excluded = j.at("excluded").get<std::uint64_t>();
    r.records = j.value("records", std::uint64_t{0});
    r.fingerprint = j.value("fingerprint", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::format, std::string("bad report: ") + e.what());
  }
}

BinnedReport load_report(const std::string& path) { return parse_report_json(read_file(path)); }

namespace {

std::string json_id(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw Error(Errc::format, "example_id must be a string or integer");
}

std::vector<std::string> string_list(const json& rec, const char* key) {
  std::vector<std::string> out;
  for (const auto& v : rec.at(key)) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

JoinResult join_predictions(std::span<const ScoreRow> scores, const std::string& predictions_path,
                            const JoinOptions& options) {
  std::unordered_map<std::string, const ScoreRow*> by_id;
  for (const auto& s : scores)
    if (!by_id.emplace(s.example_id, &s).second)
      throw Error(Errc::format, "duplicate example_id '" + s.example_id + "' in score rows");

  std::ifstream in(predictions_path);
  if (!in) throw Error(Errc::io, "cannot open " + predictions_path);
  JoinResult out;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    EvalRecord rec;
    try {
      auto j = json::parse(line);
      rec.example_id = json_id(j.at("example_id"));
      if (!seen.emplace(rec.example_id, true).second)
        throw Error(Errc::format, "duplicate example_id '" + rec.example_id + "'");
      if (options.task == EvalTask::clf) {
        auto ranked = string_list(j, "ranked");
        rec.correctness = topk_correct(ranked, j.at("label").get<std::string>(), options.top_k) ? 1.0 : 0.0;
      } else {
        auto answers = string_list(j, "human_answers");
        rec.predicted_answer = j.at("prediction").get<std::string>();
        rec.correctness = vqa_accuracy(*rec.predicted_answer, answers, options.vqa_mode);
        const auto truth = normalize_vqa_answer(derive_ground_truth(answers));
        rec.ground_truth_is_yes = truth == "yes";
        const bool yes_no = truth == "yes" || truth == "no";
        if ((options.task == EvalTask::vqa_yesno && !*rec.ground_truth_is_yes) ||
            (options.task == EvalTask::vqa && options.exclude_yes_no && yes_no)) {
          ++out.filtered;
          continue;
        }
      }
    } catch (const json::exception& e) {
      throw Error(Errc::format, predictions_path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), predictions_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto it = by_id.find(rec.example_id);
    if (it == by_id.end()) {
      ++out.unscored;
      continue;
    }
    const auto& pmi = it->second->mean_pmi;
    if (!pmi || !std::isfinite(*pmi)) {
      ++out.excluded;
      continue;
    }
    rec.pmi = *pmi;
    out.records.push_back(std::move(rec));
  }
  for (const auto& s : scores)
    if (!seen.count(s.example_id)) ++out.unpredicted;
  if (out.unscored > 0) log_warning(std::to_string(out.unscored) + " prediction(s) have no score row");
  if (out.unpredicted > 0) log_warning(std::to_string(out.unpredicted) + " score row(s) have no prediction");
  if (out.excluded > 0) log_warning(std::to_string(out.excluded) + " example(s) excluded for undefined or non-finite PMI");
  return out;
}

BinnedReport evaluate(const JoinResult& joined, EvalTask task, const ReportOptions& options) {
  if (joined.records.empty()) throw Error(Errc::empty, "no joined records to evaluate");
  BinnedReport r;
  if (task == EvalTask::vqa_yesno) {
    r = build_report(yes_rate_records(joined.records), options, joined.excluded);
  } else {
    r = build_report(joined.records, options, joined.excluded);
  }
  r.task = eval_task_name(task);
  return r;
}

}  // namespace comira
