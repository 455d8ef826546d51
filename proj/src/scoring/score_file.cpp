#include "scoring/score_file.hpp"

#include <cmath>
#include <fstream>
#include <variant>

#include <json.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"

namespace comira {

using json = nlohmann::json;

const char* score_kind_name(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::caption: return "caption";
    case ScoreKind::vqa: return "vqa";
    case ScoreKind::vqa_question_only: return "vqa-question-only";
  }
  return "caption";
}

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "caption") return ScoreKind::caption;
  if (name == "vqa") return ScoreKind::vqa;
  if (name == "vqa-question-only" || name == "question-only") return ScoreKind::vqa_question_only;
  throw Error(Errc::invalid_argument, "score kind must be caption, vqa or vqa-question-only, got '" + name + "'");
}

std::string score_meta_path(const std::string& score_path) { return score_path + ".meta.json"; }

namespace {

// JSON has no infinities; non-finite values travel as strings.
json pmi_value(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::optional<double> parse_pmi_value(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "-inf") return -INFINITY;
    if (s == "inf") return INFINITY;
    if (s == "nan") return NAN;
  }
  throw Error(Errc::format, "mean_pmi must be a number, null, or a non-finite marker");
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw Error(Errc::format, "example_id must be a string or integer");
}

struct Job {
  std::string id;
  std::variant<std::monostate, std::string, VqaExample> input;  // monostate: malformed
  std::optional<PmiScore> score;
};

Job parse_job(const std::string& line, std::uint64_t ordinal, const ScoreInputOptions& options) {
  Job job;
  job.id = std::to_string(ordinal);
  try {
    auto rec = json::parse(line);
    if (!rec.is_object()) return job;
    if (auto it = rec.find(options.id_field); it != rec.end()) job.id = id_string(*it);
    if (options.kind == ScoreKind::caption) {
      auto it = rec.find(options.text_field);
      if (it == rec.end() || !it->is_string()) return job;
      job.input = it->get<std::string>();
      return job;
    }
    VqaExample ex;
    ex.example_id = job.id;
    auto q = rec.find("question");
    if (q == rec.end() || !q->is_string()) return job;
    ex.question = q->get<std::string>();
    if (auto gt = rec.find("ground_truth"); gt != rec.end() && gt->is_string()) ex.ground_truth = gt->get<std::string>();
    if (auto ha = rec.find("human_answers"); ha != rec.end() && ha->is_array())
      for (const auto& a : *ha)
        if (a.is_string()) ex.human_answers.push_back(a.get<std::string>());
    if (ex.ground_truth.empty() && ex.human_answers.empty() && options.kind == ScoreKind::vqa) return job;
    job.input = std::move(ex);
  } catch (const json::exception&) {
  } catch (const Error&) {
  }
  return job;
}

}  // namespace

std::string score_row_json(const ScoreRow& row) {
  json j;
  j["example_id"] = row.example_id;
  j["mean_pmi"] = row.mean_pmi ? pmi_value(*row.mean_pmi) : json(nullptr);
  j["pair_count"] = row.pair_count;
  return j.dump();
}

ScoreBatchStats score_file(const Scorer& scorer, const std::string& in_path, const std::string& out_path,
                           const ScoreInputOptions& options) {
  std::ifstream in(in_path);
  if (!in) throw Error(Errc::io, "cannot open " + in_path);
  std::vector<Job> jobs;
  std::string line;
  std::uint64_t ordinal = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    jobs.push_back(parse_job(line, ordinal++, options));
  }

  parallel_chunks(jobs.size(), std::max(1u, options.workers), [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& job = jobs[i];
      if (auto* text = std::get_if<std::string>(&job.input)) {
        job.score = scorer.try_caption_mean_pmi(*text, job.id, options.audit);
      } else if (auto* ex = std::get_if<VqaExample>(&job.input)) {
        job.score = options.kind == ScoreKind::vqa ? scorer.try_vqa_example_pmi(*ex, options.audit)
                                                   : scorer.try_question_only_pmi(*ex, options.audit);
      }
    }
  });

  ScoreBatchStats stats;
  std::string out;
  const auto& vocab = scorer.model().vocab();
  for (const auto& job : jobs) {
    if (std::holds_alternative<std::monostate>(job.input)) {
      ++stats.malformed;
      continue;
    }
    ++stats.examples;
    json j;
    j["example_id"] = job.id;
    if (job.score) {
      ++stats.scored;
      if (!std::isfinite(job.score->mean_pmi)) ++stats.non_finite;
      j["mean_pmi"] = pmi_value(job.score->mean_pmi);
      j["pair_count"] = job.score->pair_count;
      if (options.audit) {
        auto pairs = json::array();
        for (const auto& p : job.score->pairs) pairs.push_back({vocab.lemma(p.a), vocab.lemma(p.b), pmi_value(p.pmi)});
        j["pairs"] = std::move(pairs);
      }
    } else {
      ++stats.undefined;
      j["mean_pmi"] = nullptr;
      j["pair_count"] = 0;
    }
    out += j.dump();
    out += '\n';
  }
  if (stats.malformed > 0) log_warning(std::to_string(stats.malformed) + " malformed record(s) skipped in " + in_path);
  if (stats.malformed * 2 > jobs.size())
    throw Error(Errc::corrupt, in_path + ": more than half of the records are malformed");
  write_file_atomic(out_path, out);

  const auto& sm = scorer.model().smoothing();
  json meta = {{"fingerprint", vocab.fingerprint_hex()},
               {"kind", score_kind_name(options.kind)},
               {"normalization", normalization_name(sm.mode)},
               {"alpha_pair", sm.alpha_pair},
               {"alpha_single", sm.alpha_single}};
  write_file_atomic(score_meta_path(out_path), meta.dump(2) + "\n");
  return stats;
}

std::vector<ScoreRow> load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      ScoreRow row;
      row.example_id = id_string(j.at("example_id"));
      row.mean_pmi = parse_pmi_value(j.at("mean_pmi"));
      row.pair_count = j.value("pair_count", std::size_t{0});
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": bad score record: " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::optional<ScoreFileMeta> load_score_meta(const std::string& score_path) {
  std::ifstream in(score_meta_path(score_path));
  if (!in) return std::nullopt;
  try {
    auto j = json::parse(in);
    ScoreFileMeta m;
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.kind = parse_score_kind(j.at("kind").get<std::string>());
    m.normalization = j.value("normalization", "");
    m.alpha_pair = j.value("alpha_pair", 0.0);
    m.alpha_single = j.value("alpha_single", 0.0);
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::format, score_meta_path(score_path) + ": " + e.what());
  }
}

}  // namespace comira
