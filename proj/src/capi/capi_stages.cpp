#include <cmath>
#include <limits>
#include <optional>

#include "capi/capi_internal.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "dataset/filter.hpp"
#include "dataset/gen_jobs.hpp"
#include "dataset/image.hpp"
#include "dataset/pairs.hpp"
#include "dataset/paste_dataset.hpp"
#include "dataset/prompts.hpp"
#include "dataset/sample.hpp"
#include "eval/report.hpp"
#include "scoring/score_file.hpp"

using namespace comira;
using comira::capi::guard;
using comira::capi::need;
using comira::capi::need_str;

namespace {

std::vector<EvalRecord> to_records(const comira_eval_record* records, size_t count) {
  if (count > 0) need(records, "records");
  std::vector<EvalRecord> out(count);
  for (size_t i = 0; i < count; ++i) {
    out[i].example_id = records[i].example_id ? records[i].example_id : std::to_string(i);
    out[i].pmi = records[i].pmi;
    out[i].correctness = records[i].correctness;
  }
  return out;
}

double or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

extern "C" {

/* ---- evaluation ---- */

void comira_eval_options_default(comira_eval_options* o) {
  if (!o) return;
  *o = {"clf", 20, 0.05, 1, 1, 0, nullptr};
}

comira_status comira_vqa_accuracy(const char* prediction, const char* const* answers, size_t count, int official,
                                  double* out) {
  return guard([&] {
    need(out, "out") = vqa_accuracy(need_str(prediction, "prediction"), capi::string_array(answers, count, "answers"),
                                    official ? VqaMode::official : VqaMode::simple);
  });
}

comira_status comira_topk_correct(const char* const* ranked, size_t count, const char* label, size_t k, int* out) {
  return guard([&] {
    need(out, "out") = topk_correct(capi::string_array(ranked, count, "ranked"), need_str(label, "label"), k) ? 1 : 0;
  });
}

comira_status comira_pearson_r(const double* xs, const double* ys, size_t count, double* out) {
  return guard([&] {
    if (count > 0) {
      need(xs, "xs");
      need(ys, "ys");
    }
    need(out, "out") = pearson_r(std::span<const double>(xs, count), std::span<const double>(ys, count));
  });
}

comira_status comira_accuracy_gap(const comira_eval_record* records, size_t count, double tail_fraction, double* out) {
  return guard([&] { need(out, "out") = accuracy_gap(to_records(records, count), tail_fraction); });
}

comira_status comira_bin_accuracy(const comira_eval_record* records, size_t count, size_t num_bins, comira_bin* bins) {
  return guard([&] {
    need(bins, "bins");
    auto result = bin_accuracy(to_records(records, count), num_bins);
    for (size_t i = 0; i < result.size(); ++i) bins[i] = {result[i].pmi_mean, result[i].accuracy, result[i].n};
  });
}

comira_status comira_eval_report(const char* scores_path, const char* predictions_path,
                                 const comira_eval_options* options, const char* out_path,
                                 comira_eval_summary* summary) {
  return guard([&] {
    comira_eval_options o;
    comira_eval_options_default(&o);
    if (options) o = *options;
    const std::string scores = need_str(scores_path, "scores_path");
    const EvalTask task = parse_eval_task(o.task ? o.task : "clf");

    auto meta = load_score_meta(scores);
    if (o.vocab_path) {
      auto vocab = ConceptVocabulary::load(o.vocab_path);
      if (!meta) throw Error(Errc::mismatch, "pipeline mismatch: score file has no fingerprint metadata to verify");
      if (meta->fingerprint != vocab.fingerprint_hex())
        throw Error(Errc::mismatch, "pipeline mismatch: scores fingerprint " + meta->fingerprint +
                                        " != vocabulary fingerprint " + vocab.fingerprint_hex());
    }
    if (meta && task == EvalTask::vqa_yesno && meta->kind != ScoreKind::vqa_question_only)
      log_warning("vqa-yesno expects question-only scores; score file kind is " +
                  std::string(score_kind_name(meta->kind)));

    JoinOptions jo;
    jo.task = task;
    jo.top_k = o.top_k;
    jo.vqa_mode = o.vqa_official ? VqaMode::official : VqaMode::simple;
    jo.exclude_yes_no = o.exclude_yes_no != 0;
    auto rows = load_scores(scores);
    auto joined = join_predictions(rows, need_str(predictions_path, "predictions_path"), jo);
    auto report = evaluate(joined, task, {o.num_bins, o.tail_fraction});
    if (meta) report.fingerprint = meta->fingerprint;
    const std::string out = need_str(out_path, "out_path");
    emit_report(report, out, report_format_for(out));
    if (summary)
      *summary = {report.records,   joined.excluded,          joined.unscored,
                  joined.unpredicted, joined.filtered,        or_nan(report.pearson_r),
                  or_nan(report.record_pearson_r), report.accuracy_gap};
  });
}

/* ---- dataset construction ---- */

comira_status comira_select_pairs(const comira_model* m, const comira_normalizer* n, const char* class_list_path,
                                  const char* out_path, comira_select_stats* stats) {
  return guard([&] {
    const auto& model = need(m, "model").model;
    const auto& norm = need(n, "normalizer").normalizer;
    model.vocab().require_built_with(norm.config());
    auto classes = load_class_list(need_str(class_list_path, "class_list_path"));
    if (classes.empty()) throw Error(Errc::empty, "class list is empty");
    auto categories = derive_categories(classes, norm);
    auto pairs = select_candidate_pairs(model.vocab(), categories);
    fill_pmi(pairs, model);
    save_pairs(need_str(out_path, "out_path"), pairs);
    if (stats) *stats = {classes.size(), categories.size(), pairs.size()};
  });
}

comira_status comira_filter_accessories(const char* pairs_path, const char* lexicon_path, const char* llm_config_path,
                                        const char* out_path, const char* retry_path, const char* report_path,
                                        comira_filter_stats* stats) {
  return guard([&] {
    auto pairs = load_pairs(need_str(pairs_path, "pairs_path"));
    auto lexicon = Lexicon::load(lexicon_path ? lexicon_path : Lexicon::default_path());
    std::unique_ptr<HttpGenerator> llm;
    unsigned in_flight = 4;
    if (llm_config_path) {
      llm = std::make_unique<HttpGenerator>(ClientConfig::load(llm_config_path, ClientConfig::text_defaults()));
      in_flight = llm->config().max_in_flight;
    }
    auto result = filter_accessories(pairs, lexicon, lexicon, llm.get(), in_flight);
    save_pairs(need_str(out_path, "out_path"), result.kept);
    if (retry_path) save_pairs(retry_path, result.retryable);
    if (report_path) write_file_atomic(report_path, filter_report_json(result.report));
    const auto& r = result.report;
    if (stats)
      *stats = {r.input_pairs, r.input_accessories, r.dropped[0], r.dropped[1], r.dropped[2], r.dropped[3],
                r.dropped[4], r.dropped[5], r.kept_accessories, r.retryable_accessories, result.kept.size()};
    if (r.retryable_accessories > 0)
      throw Error(Errc::external, std::to_string(r.retryable_accessories) +
                                      " visualizability call(s) failed; affected pairs are retryable" +
                                      (retry_path ? std::string(" (see ") + retry_path + ")" : std::string()));
  });
}

comira_status comira_sample_pairs(const char* pairs_path, size_t target, size_t strata, uint64_t seed,
                                  const char* out_path) {
  return guard([&] {
    auto pairs = load_pairs(need_str(pairs_path, "pairs_path"));
    save_pairs(need_str(out_path, "out_path"), stratified_sample(pairs, target, strata, seed));
  });
}

comira_status comira_render_prompt(const char* template_name, const char* const* keys, const char* const* values,
                                   size_t count, char** out) {
  return guard([&] {
    need(out, "out");
    auto k = capi::string_array(keys, count, "keys");
    auto v = capi::string_array(values, count, "values");
    PromptSlots slots;
    for (size_t i = 0; i < count; ++i) slots[k[i]] = v[i];
    *out = capi::dup_string(render_prompt(parse_prompt_template(need_str(template_name, "template_name")), slots));
  });
}

int comira_parse_llm_answer(const char* response) {
  if (!response) return -1;
  switch (parse_llm_answer(response)) {
    case LlmAnswer::yes: return 1;
    case LlmAnswer::no: return 0;
    default: return -1;
  }
}

comira_status comira_gen_prompts(const char* pairs_path, const char* out_path, const char* llm_config_path,
                                 const char* image_config_path, const char* image_dir, const char* accessory_dir,
                                 comira_gen_stats* stats) {
  return guard([&] {
    auto pairs = load_pairs(need_str(pairs_path, "pairs_path"));
    GenJobOptions opt;
    std::unique_ptr<HttpGenerator> llm, images;
    if (llm_config_path) {
      opt.caption_config = ClientConfig::load(llm_config_path, ClientConfig::text_defaults());
      llm = std::make_unique<HttpGenerator>(opt.caption_config);
      opt.caption_llm = llm.get();
    }
    if (image_config_path) {
      opt.image_config = ClientConfig::load(image_config_path, ClientConfig::image_defaults());
      images = std::make_unique<HttpGenerator>(opt.image_config);
      opt.image_service = images.get();
    }
    if (image_dir) opt.image_dir = image_dir;
    if (accessory_dir) opt.accessory_dir = accessory_dir;
    auto s = write_generation_jobs(pairs, need_str(out_path, "out_path"), opt);
    if (stats)
      *stats = {s.jobs, s.captions, s.caption_failures, s.images, s.image_failures, s.accessory_images,
                s.accessory_failures};
    const auto failed = s.caption_failures + s.image_failures + s.accessory_failures;
    if (failed > 0)
      throw Error(Errc::external, std::to_string(failed) + " generation call(s) failed; rerun to retry them");
  });
}

void comira_edit_options_default(comira_edit_options* o) {
  if (!o) return;
  PasteOptions d;
  *o = {d.run_seed, d.bases_per_pair, d.max_area_fraction, d.white_threshold, 0};
}

comira_status comira_edit_images(const char* pairs_path, const char* base_index_path,
                                 const char* accessory_index_path, const char* out_dir,
                                 const comira_edit_options* options, comira_edit_stats* stats) {
  return guard([&] {
    comira_edit_options o;
    comira_edit_options_default(&o);
    if (options) o = *options;
    PasteOptions p;
    p.run_seed = o.seed;
    p.out_dir = need_str(out_dir, "out_dir");
    p.bases_per_pair = o.bases_per_pair;
    p.max_area_fraction = o.max_area_fraction;
    p.white_threshold = o.white_threshold;
    p.workers = capi::workers_or_default(o.workers);
    auto pairs = load_pairs(need_str(pairs_path, "pairs_path"));
    auto bases = load_asset_index(need_str(base_index_path, "base_index_path"));
    auto accessories = load_asset_index(need_str(accessory_index_path, "accessory_index_path"));
    auto s = build_paste_dataset(pairs, bases, accessories, p);
    if (stats) *stats = {s.rows, s.generated, s.reused, s.errors};
  });
}

comira_status comira_paste_png(const char* base_path, const char* accessory_path, uint64_t seed,
                               double max_area_fraction, uint8_t white_threshold, const char* out_path,
                               comira_edit_spec* spec) {
  return guard([&] {
    auto base = load_png(need_str(base_path, "base_path"));
    auto accessory = load_png(need_str(accessory_path, "accessory_path"));
    if (accessory.channels == 3) accessory = white_to_alpha(accessory, white_threshold);
    auto result = paste_accessory(base, accessory, seed, max_area_fraction);
    save_png(need_str(out_path, "out_path"), result.image);
    if (spec) *spec = {result.spec.scale, result.spec.x, result.spec.y, result.spec.width, result.spec.height};
  });
}

}  // extern "C"
