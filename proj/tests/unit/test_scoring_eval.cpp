#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <json.hpp>

#include "common/error.hpp"
#include "cooccur/count_pairs.hpp"
#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "pmi/pmi_model.hpp"
#include "scoring/score_file.hpp"
#include "scoring/scoring.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace comira;
using nlohmann::json;

namespace {

// A small corpus where every concept survives the threshold.
struct Fixture {
  Normalizer norm;
  std::shared_ptr<ConceptVocabulary> vocab;
  std::unique_ptr<PmiModel> model;

  explicit Fixture(const std::vector<std::string>& texts) {
    std::map<std::string, std::uint64_t> df;
    for (const auto& t : texts)
      for (auto& l : concept_set(norm, t)) ++df[l];
    vocab = std::make_shared<ConceptVocabulary>(
        ConceptVocabulary::from_doc_freqs({df.begin(), df.end()}, texts.size(), 0, norm.config()));
    ConceptExtractor ex(norm, *vocab);
    std::vector<std::vector<ConceptId>> docs;
    for (const auto& t : texts) docs.push_back(ex.ids(t));
    auto table = std::make_shared<PairCountTable>(count_pairs(docs, *vocab, {}));
    model = std::make_unique<PmiModel>(vocab, table, SmoothingConfig{});
  }
  double pmi(const char* a, const char* b) const { return model->pmi(vocab->id(a), vocab->id(b)); }
};

const std::vector<std::string> kTexts = {
    "a woman wearing glasses",  "a dog and a cat",        "cat on a sofa",       "dog with a ball",
    "woman with a dog",         "glasses on a table",     "a cat wearing a hat", "yes the dog is here",
    "a bird in a tree",         "a woman riding a bike",  "bird on a bike",      "ball on a table",
};

std::vector<EvalRecord> records(const std::vector<std::pair<double, double>>& pc) {
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    EvalRecord r;
    char id[16];
    std::snprintf(id, sizeof id, "r%04zu", i);
    r.example_id = id;
    r.pmi = pc[i].first;
    r.correctness = pc[i].second;
    out.push_back(r);
  }
  return out;
}

}  // namespace

// ---- caption scoring ----

TEST_CASE("mean pmi over a single pair and over three pairs") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  auto two = s.caption_mean_pmi("a dog and a cat");
  CHECK(two.pair_count == 1);
  CHECK(two.mean_pmi == f.pmi("dog", "cat"));
  auto three = s.caption_mean_pmi("dog cat ball", "x", true);
  CHECK(three.pair_count == 3);
  CHECK(three.example_id == "x");
  CHECK(three.pairs.size() == 3);
  double expected = (f.pmi("dog", "cat") + f.pmi("dog", "ball") + f.pmi("cat", "ball")) / 3.0;
  CHECK(std::abs(three.mean_pmi - expected) <= 1e-12);
}

TEST_CASE("degenerate captions have no score") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  try {
    s.caption_mean_pmi("the of and");
    FAIL("expected undefined");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined);
  }
  CHECK_FALSE(s.try_caption_mean_pmi("dog").has_value());
  CHECK_FALSE(s.try_caption_mean_pmi("dog zyxwv qqq").has_value());
}

TEST_CASE("scores ignore order, duplicates, stopwords and inflection") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  auto base = s.caption_mean_pmi("dog cat ball").mean_pmi;
  CHECK(s.caption_mean_pmi("ball, the CAT and a dog").mean_pmi == base);
  CHECK(s.caption_mean_pmi("dogs dog cats balls").mean_pmi == base);
  CHECK(s.caption_mean_pmi("dog cat ball zyxwv").mean_pmi == base);
}

TEST_CASE("key pair pmi is the model pmi") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  CHECK(s.key_pair_pmi("glasses", "woman") == f.pmi("glasses", "woman"));
  CHECK_THROWS_AS(s.key_pair_pmi("zyxwv", "woman"), Error);
}

TEST_CASE("scorer refuses a normalizer the vocabulary was not built with") {
  Fixture f(kTexts);
  auto cfg = f.norm.config();
  cfg.stopwords.insert(std::lower_bound(cfg.stopwords.begin(), cfg.stopwords.end(), "dog"), "dog");
  Normalizer other(cfg);
  CHECK_THROWS_AS(Scorer(*f.model, other), Error);
}

// ---- vqa scoring ----

TEST_CASE("ground truth is the folded mode with lexicographic ties") {
  std::vector<std::string> a = {"cat", "cat", "dog"}, b = {"b", "a"}, c = {"Yes", "yes", "no"};
  CHECK(derive_ground_truth(a) == "cat");
  CHECK(derive_ground_truth(b) == "a");
  CHECK(derive_ground_truth(c) == "yes");
  CHECK(fold_answer("  On   The\tTable ") == "on the table");
}

TEST_CASE("question and answer concepts form one set") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  VqaExample ex{"q", "who is wearing glasses?", {"woman", "woman", "a woman"}, ""};
  auto ids = s.vqa_concepts(ex);
  std::vector<ConceptId> expected = {f.vocab->id("wear"), f.vocab->id("glasses"), f.vocab->id("woman")};
  CHECK(ids == expected);
  auto score = s.vqa_example_pmi(ex);
  CHECK(score.pair_count == 3);
  double mean = (f.pmi("wear", "glasses") + f.pmi("wear", "woman") + f.pmi("glasses", "woman")) / 3.0;
  CHECK(std::abs(score.mean_pmi - mean) <= 1e-12);

  VqaExample two{"q2", "what is the dog near?", {}, "cat"};
  auto t = s.vqa_example_pmi(two);
  CHECK(t.pair_count == 1);
  CHECK(t.mean_pmi == f.pmi("dog", "cat"));
}

TEST_CASE("yes is kept for question plus answer, dropped for question only") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  VqaExample ex{"q", "is the dog with the cat?", {}, "yes"};
  auto all = s.vqa_concepts(ex);
  CHECK(std::find(all.begin(), all.end(), f.vocab->id("yes")) != all.end());
  VqaExample q{"q", "dog cat yes", {}, "no"};
  std::vector<ConceptId> expected = {f.vocab->id("dog"), f.vocab->id("cat")};
  CHECK(s.question_concepts(q) == expected);
  CHECK(s.question_only_pmi(q).mean_pmi == f.pmi("dog", "cat"));
  VqaExample one{"q", "is there a dog?", {}, "yes"};
  CHECK_FALSE(s.try_question_only_pmi(one).has_value());
  CHECK_THROWS_AS(s.question_only_pmi(one), Error);
}

// ---- score files ----

TEST_CASE("score file rows follow input order and match direct scoring") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  testutil::TempDir dir;
  testutil::write_text(dir.file("in.jsonl"),
                       "{\"example_id\":\"e0\",\"caption\":\"dog and cat\"}\n"
                       "{\"example_id\":\"e1\",\"caption\":\"the of\"}\n"
                       "not json\n"
                       "{\"example_id\":2,\"caption\":\"woman wearing glasses\"}\n");
  ScoreInputOptions opt;
  auto stats = score_file(s, dir.file("in.jsonl"), dir.file("out.jsonl"), opt);
  CHECK(stats.examples == 3);
  CHECK(stats.scored == 2);
  CHECK(stats.undefined == 1);
  CHECK(stats.malformed == 1);
  auto rows = load_scores(dir.file("out.jsonl"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].example_id == "e0");
  CHECK(*rows[0].mean_pmi == s.caption_mean_pmi("dog and cat").mean_pmi);
  CHECK_FALSE(rows[1].mean_pmi.has_value());
  CHECK(rows[1].pair_count == 0);
  CHECK(rows[2].example_id == "2");
  CHECK(rows[2].pair_count == 3);
  auto meta = load_score_meta(dir.file("out.jsonl"));
  REQUIRE(meta.has_value());
  CHECK(meta->fingerprint == f.vocab->fingerprint_hex());
  CHECK(meta->kind == ScoreKind::caption);
  CHECK(meta->alpha_single == 1e4);

  opt.workers = 4;
  score_file(s, dir.file("in.jsonl"), dir.file("out4.jsonl"), opt);
  CHECK(testutil::read_text(dir.file("out4.jsonl")) == testutil::read_text(dir.file("out.jsonl")));
}

TEST_CASE("vqa score file derives the ground truth") {
  Fixture f(kTexts);
  Scorer s(*f.model, f.norm);
  testutil::TempDir dir;
  testutil::write_text(dir.file("in.jsonl"),
                       "{\"example_id\":\"q\",\"question\":\"who is wearing glasses?\","
                       "\"human_answers\":[\"woman\",\"woman\",\"man\"]}\n");
  ScoreInputOptions opt;
  opt.kind = ScoreKind::vqa;
  opt.audit = true;
  score_file(s, dir.file("in.jsonl"), dir.file("out.jsonl"), opt);
  auto line = json::parse(testutil::read_text(dir.file("out.jsonl")));
  CHECK(line["pair_count"] == 3);
  CHECK(line["pairs"].size() == 3);
}

// ---- metrics ----

TEST_CASE("official vqa accuracy on the derived cases") {
  std::vector<std::string> three(10, "no"), one(10, "no");
  for (int i = 0; i < 3; ++i) three[i] = "yes";
  one[4] = "yes";
  CHECK(vqa_accuracy("yes", three) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(vqa_accuracy("yes", one) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(vqa_accuracy("maybe", one) == 0.0);
  CHECK(vqa_accuracy("yes", three) == oracle::vqa_official("yes", three));
  CHECK(vqa_accuracy("yes", one) == oracle::vqa_official("yes", one));
  CHECK(vqa_accuracy("yes", three, VqaMode::simple) == 1.0);
  CHECK(vqa_accuracy("yes", one, VqaMode::simple) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("official vqa accuracy agrees with subset enumeration") {
  std::mt19937_64 gen(3);
  const std::vector<std::string> pool = {"red", "blue", "two", "yes"};
  for (int t = 0; t < 500; ++t) {
    std::vector<std::string> answers(10);
    for (auto& a : answers) a = pool[gen() % pool.size()];
    const auto& pred = pool[gen() % pool.size()];
    REQUIRE(std::abs(vqa_accuracy(pred, answers) - oracle::vqa_official(pred, answers)) <= 1e-15);
  }
}

TEST_CASE("vqa answers are normalized before matching") {
  CHECK(normalize_vqa_answer("The  Table.") == "table");
  CHECK(normalize_vqa_answer("an apple, please") == "apple please");
  std::vector<std::string> answers = {"On the table", "on the table", "ON THE TABLE", "table"};
  CHECK(vqa_accuracy("on the table!", answers) == doctest::Approx(0.75));
  std::vector<std::string> none;
  CHECK_THROWS_AS(vqa_accuracy("x", none), Error);
}

TEST_CASE("top-k correctness") {
  std::vector<std::string> ranked = {"cat", "dog"};
  CHECK(topk_correct(ranked, "cat", 1));
  CHECK_FALSE(topk_correct(ranked, "dog", 1));
  CHECK(topk_correct(ranked, "dog", 5));
  for (std::size_t k : {1, 2, 5}) CHECK_FALSE(topk_correct(ranked, "emu", k));
  CHECK_THROWS_AS(topk_correct(ranked, "cat", 0), Error);
}

TEST_CASE("equal-count bins") {
  std::vector<std::pair<double, double>> pc;
  for (int i = 0; i < 100; ++i) pc.push_back({static_cast<double>(99 - i), 1.0});
  auto bins = bin_accuracy(records(pc), 20);
  REQUIRE(bins.size() == 20);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    CHECK(bins[i].n == 5);
    CHECK(bins[i].accuracy == 1.0);
    CHECK(bins[i].pmi_mean == doctest::Approx(5.0 * i + 2.0));
  }
  std::vector<std::pair<double, double>> tied(103, {1.5, 0.0});
  auto tb = bin_accuracy(records(tied), 20);
  auto [lo, hi] = std::minmax_element(tb.begin(), tb.end(), [](const Bin& a, const Bin& b) { return a.n < b.n; });
  CHECK(hi->n - lo->n <= 1);
  std::size_t total = 0;
  for (const auto& b : tb) total += b.n;
  CHECK(total == 103);
  CHECK_THROWS_AS(bin_accuracy(records(pc), 1), Error);
  CHECK_THROWS_AS(bin_accuracy(records({{1, 1}}), 2), Error);
}

TEST_CASE("pearson correlation examples") {
  std::vector<double> x = {1, 2, 3}, up = {1, 2, 3}, down = {3, 2, 1};
  CHECK(std::abs(pearson_r(x, up) - 1.0) <= 1e-12);
  CHECK(std::abs(pearson_r(x, down) + 1.0) <= 1e-12);
  std::vector<double> a = {0, 1, 2, 3}, b = {0, 1, 0, 1};
  CHECK(pearson_r(a, b) == doctest::Approx(0.4472).epsilon(1e-4 / 0.4472));
  CHECK(std::abs(pearson_r(a, b) - 1.0 / std::sqrt(5.0)) <= 1e-12);
  std::vector<double> flat = {2, 2, 2, 2};
  try {
    pearson_r(a, flat);
    FAIL("expected undefined");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined);
  }
}

TEST_CASE("pearson agrees with the two-pass oracle") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> d(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = d(gen);
      y[i] = 0.3 * x[i] + d(gen);
    }
    REQUIRE(std::abs(pearson_r(x, y) - oracle::pearson(x, y)) <= 1e-12);
  }
}

TEST_CASE("accuracy gap examples") {
  std::vector<std::pair<double, double>> extreme;
  for (int i = 0; i < 100; ++i) extreme.push_back({static_cast<double>(i), i >= 95 ? 1.0 : i < 5 ? 0.0 : 0.5});
  CHECK(accuracy_gap(records(extreme), 0.05) == 1.0);
  std::vector<std::pair<double, double>> all;
  for (int i = 0; i < 100; ++i) all.push_back({static_cast<double>(i % 7), 1.0});
  CHECK(accuracy_gap(records(all), 0.05) == 0.0);
  std::vector<std::pair<double, double>> median;
  for (int i = 0; i < 40; ++i) median.push_back({static_cast<double>(i), i >= 20 ? 1.0 : 0.0});
  CHECK(accuracy_gap(records(median), 0.05) == 1.0);
  CHECK_THROWS_AS(accuracy_gap(records(median), 0.0), Error);
  CHECK_THROWS_AS(accuracy_gap(records(median), 0.6), Error);
  CHECK_THROWS_AS(accuracy_gap(records({{1, 1}}), 0.05), Error);
}

TEST_CASE("accuracy gap agrees with the sorted-tail oracle") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 20 + gen() % 300;
    std::vector<std::pair<double, double>> pc;
    std::vector<oracle::Rec> recs;
    for (std::size_t i = 0; i < n; ++i) pc.push_back({static_cast<double>(gen() % 13), (gen() % 3) / 2.0});
    auto rs = records(pc);
    for (const auto& r : rs) recs.push_back({r.example_id, r.pmi, r.correctness});
    for (double f : {0.05, 0.1, 0.25}) REQUIRE(std::abs(accuracy_gap(rs, f) - oracle::accuracy_gap(recs, f)) <= 1e-12);
  }
}

TEST_CASE("yes rate by pmi") {
  auto make = [](auto pred) {
    std::vector<EvalRecord> rs;
    for (int i = 0; i < 40; ++i) {
      EvalRecord r;
      r.example_id = "y" + std::to_string(100 + i);
      r.pmi = i;
      r.ground_truth_is_yes = true;
      r.predicted_answer = pred(i);
      rs.push_back(r);
    }
    EvalRecord noise;
    noise.example_id = "n";
    noise.ground_truth_is_yes = false;
    noise.predicted_answer = "yes";
    rs.push_back(noise);
    return rs;
  };
  for (const auto& b : yes_rate_by_pmi(make([](int) { return std::string("Yes"); }), 4)) CHECK(b.accuracy == 1.0);
  for (const auto& b : yes_rate_by_pmi(make([](int) { return std::string("no"); }), 4)) CHECK(b.accuracy == 0.0);
  auto step = yes_rate_by_pmi(make([](int i) { return std::string(i >= 20 ? "yes" : "no"); }), 4);
  CHECK(step[0].accuracy == 0.0);
  CHECK(step[1].accuracy == 0.0);
  CHECK(step[2].accuracy == 1.0);
  CHECK(step[3].accuracy == 1.0);
  std::vector<EvalRecord> none(3);
  CHECK_THROWS_AS(yes_rate_records(none), Error);
}

// ---- reports ----

TEST_CASE("report json round trip and csv rows") {
  std::vector<std::pair<double, double>> pc;
  for (int i = 0; i < 60; ++i) pc.push_back({i * 0.1, i % 3 == 0 ? 0.0 : 1.0});
  auto r = build_report(records(pc), {6, 0.1}, 4);
  r.task = "clf";
  r.fingerprint = "abc";
  CHECK(r.records == 60);
  CHECK(r.excluded == 4);
  CHECK(r.bins.size() == 6);
  REQUIRE(r.pearson_r.has_value());
  CHECK(parse_report_json(report_json(r)) == r);
  auto csv = report_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 7);

  testutil::TempDir dir;
  emit_report(r, dir.file("r.json"), report_format_for(dir.file("r.json")));
  CHECK(load_report(dir.file("r.json")) == r);
  CHECK(report_format_for("x.CSV") == ReportFormat::csv);
}

TEST_CASE("report correlations are null on zero variance") {
  std::vector<std::pair<double, double>> pc;
  for (int i = 0; i < 40; ++i) pc.push_back({static_cast<double>(i), 1.0});
  auto r = build_report(records(pc), {4, 0.05});
  CHECK_FALSE(r.pearson_r.has_value());
  CHECK_FALSE(r.record_pearson_r.has_value());
  auto j = json::parse(report_json(r));
  CHECK(j["pearson_r"].is_null());
}

TEST_CASE("joining predictions with score rows") {
  testutil::TempDir dir;
  testutil::write_text(dir.file("p.jsonl"),
                       "{\"example_id\":\"a\",\"ranked\":[\"dog\",\"cat\"],\"label\":\"dog\"}\n"
                       "{\"example_id\":\"b\",\"ranked\":[\"cat\",\"dog\"],\"label\":\"dog\"}\n"
                       "{\"example_id\":\"c\",\"ranked\":[\"cat\"],\"label\":\"cat\"}\n"
                       "{\"example_id\":\"d\",\"ranked\":[\"cat\"],\"label\":\"cat\"}\n"
                       "{\"example_id\":\"z\",\"ranked\":[\"cat\"],\"label\":\"cat\"}\n");
  std::vector<ScoreRow> rows = {{"a", 1.0, 1},
                                {"b", 2.0, 1},
                                {"c", std::nullopt, 0},
                                {"d", -std::numeric_limits<double>::infinity(), 1},
                                {"w", 0.5, 1}};
  auto j = join_predictions(rows, dir.file("p.jsonl"), {});
  REQUIRE(j.records.size() == 2);
  CHECK(j.records[0].correctness == 1.0);
  CHECK(j.records[1].correctness == 0.0);
  CHECK(j.records[1].pmi == 2.0);
  CHECK(j.excluded == 2);
  CHECK(j.unscored == 1);
  CHECK(j.unpredicted == 1);
  JoinOptions top2;
  top2.top_k = 2;
  CHECK(join_predictions(rows, dir.file("p.jsonl"), top2).records[1].correctness == 1.0);

  testutil::write_text(dir.file("dup.jsonl"), "{\"example_id\":\"a\",\"ranked\":[],\"label\":\"x\"}\n"
                                              "{\"example_id\":\"a\",\"ranked\":[],\"label\":\"x\"}\n");
  CHECK_THROWS_AS(join_predictions(rows, dir.file("dup.jsonl"), {}), Error);
}

TEST_CASE("vqa join filters yes/no questions on request") {
  const std::string fx = COMIRA_FIXTURE_DIR;
  std::vector<ScoreRow> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({"q" + std::to_string(i), 0.1 * i, 2});
  JoinOptions opt;
  opt.task = EvalTask::vqa;
  auto all = join_predictions(rows, fx + "/vqa_preds.jsonl", opt);
  CHECK(all.records.size() == 6);
  CHECK(all.records[2].correctness == 1.0);
  CHECK(all.records[5].correctness == doctest::Approx(0.3));
  opt.exclude_yes_no = true;
  auto open = join_predictions(rows, fx + "/vqa_preds.jsonl", opt);
  CHECK(open.records.size() == 3);
  CHECK(open.filtered == 3);
  opt.task = EvalTask::vqa_yesno;
  auto yes = join_predictions(rows, fx + "/vqa_preds.jsonl", opt);
  CHECK(yes.records.size() == 2);
}
