#include <cmath>
#include <cstdlib>

#include "capi/capi_internal.hpp"
#include "common/log.hpp"
#include "cooccur/count_pairs.hpp"
#include "corpus/corpus_io.hpp"
#include "scoring/score_file.hpp"

using namespace comira;
using comira::capi::guard;
using comira::capi::need;
using comira::capi::need_str;

namespace comira::capi {

namespace {
thread_local std::string t_last_error;
}

void set_last_error(const std::string& message) { t_last_error = message; }

}  // namespace comira::capi

extern "C" {

const char* comira_version(void) { return COMIRA_VERSION; }

const char* comira_status_name(comira_status status) {
  if (status == COMIRA_OK) return "ok";
  if (status < COMIRA_E_INVALID_ARGUMENT || status > COMIRA_E_INTERNAL) return "unknown";
  return errc_name(static_cast<Errc>(status));
}

const char* comira_last_error(void) { return comira::capi::t_last_error.c_str(); }

void comira_string_free(char* s) { std::free(s); }

namespace {

struct LogHook {
  comira_log_fn fn = nullptr;
  void* user = nullptr;
};
LogHook g_log_hook;

void forward_log(LogLevel level, const char* message, void* user) {
  auto* hook = static_cast<LogHook*>(user);
  hook->fn(level == LogLevel::warning ? 1 : 0, message, hook->user);
}

}  // namespace

void comira_set_log_callback(comira_log_fn fn, void* user) {
  if (fn == nullptr) {
    set_log_sink(nullptr, nullptr);
    return;
  }
  g_log_hook = {fn, user};
  set_log_sink(&forward_log, &g_log_hook);
}

size_t comira_strings_size(const comira_strings* list) { return list ? list->items.size() : 0; }

const char* comira_strings_get(const comira_strings* list, size_t i) {
  return list && i < list->items.size() ? list->items[i].c_str() : nullptr;
}

void comira_strings_free(comira_strings* list) { delete list; }

/* ---- normalizer ---- */

comira_status comira_normalizer_new(const char* stopwords_path, const char* lemma_rules_path, int keep_yes_no,
                                    comira_normalizer** out) {
  return guard([&] {
    need(out, "out");
    auto config = NormalizerConfig::defaults();
    if (stopwords_path) config.stopwords = NormalizerConfig::load_stopwords(stopwords_path);
    if (lemma_rules_path) config.lemmatizer = Lemmatizer::from_file(lemma_rules_path);
    config.keep_yes_no = keep_yes_no != 0;
    *out = new comira_normalizer{Normalizer(std::move(config))};
  });
}

void comira_normalizer_free(comira_normalizer* n) { delete n; }

comira_status comira_normalizer_normalize(const comira_normalizer* n, const char* text, comira_strings** out) {
  return guard([&] {
    need(out, "out");
    auto lemmas = need(n, "normalizer").normalizer.normalize(need_str(text, "text"));
    *out = new comira_strings{std::move(lemmas)};
  });
}

comira_status comira_lemmatize(const comira_normalizer* n, const char* word, char** out) {
  return guard([&] {
    need(out, "out");
    const auto& norm = need(n, "normalizer").normalizer;
    *out = capi::dup_string(norm.config().lemmatizer.lemma(to_lower_ascii(need_str(word, "word"))));
  });
}

/* ---- vocabulary ---- */

namespace {

comira_vocab* wrap_vocab(ConceptVocabulary v) {
  auto p = std::make_shared<const ConceptVocabulary>(std::move(v));
  auto fp = p->fingerprint_hex();
  return new comira_vocab{std::move(p), std::move(fp)};
}

comira_counts* wrap_counts(PairCountTable t) {
  auto p = std::make_shared<const PairCountTable>(std::move(t));
  auto fp = p->fingerprint_hex();
  return new comira_counts{std::move(p), std::move(fp)};
}

CountOptions count_options(const comira_count_options* o) {
  CountOptions opt;
  if (o) {
    opt.workers = capi::workers_or_default(o->workers);
    opt.per_doc_cap = o->per_doc_cap;
    opt.memory_budget_bytes = o->memory_budget_bytes;
    if (o->spill_dir) opt.spill_dir = o->spill_dir;
  } else {
    opt.workers = default_workers();
  }
  return opt;
}

void fill_stats(const CountStats& s, comira_count_stats* out) {
  if (out) *out = {s.documents, s.pair_increments, s.capped_documents, s.spilled_runs};
}

}  // namespace

comira_status comira_vocab_build(const comira_normalizer* n, const char* corpus_path, const char* format,
                                 uint64_t min_doc_freq, unsigned workers, comira_vocab** out) {
  return guard([&] {
    need(out, "out");
    auto fmt = CorpusFormat::parse(format ? format : "plain");
    *out = wrap_vocab(build_vocabulary(need_str(corpus_path, "corpus_path"), fmt, need(n, "normalizer").normalizer,
                                 min_doc_freq, capi::workers_or_default(workers)));
  });
}

comira_status comira_vocab_build_texts(const comira_normalizer* n, const char* const* texts, size_t count,
                                       uint64_t min_doc_freq, unsigned workers, comira_vocab** out) {
  return guard([&] {
    need(out, "out");
    auto docs = capi::string_array(texts, count, "texts");
    *out = wrap_vocab(build_vocabulary(docs, need(n, "normalizer").normalizer, min_doc_freq,
                                 capi::workers_or_default(workers)));
  });
}

comira_status comira_vocab_load(const char* path, const comira_normalizer* n, comira_vocab** out) {
  return guard([&] {
    need(out, "out");
    auto v = ConceptVocabulary::load(need_str(path, "path"));
    if (n) v.require_built_with(n->normalizer.config());
    *out = wrap_vocab(std::move(v));
  });
}

comira_status comira_vocab_save(const comira_vocab* v, const char* path) {
  return guard([&] { need(v, "vocab").vocab->save(need_str(path, "path")); });
}

void comira_vocab_free(comira_vocab* v) { delete v; }

size_t comira_vocab_size(const comira_vocab* v) { return v ? v->vocab->size() : 0; }

uint64_t comira_vocab_num_docs(const comira_vocab* v) { return v ? v->vocab->num_docs() : 0; }

const char* comira_vocab_lemma(const comira_vocab* v, uint32_t id) {
  return v && id < v->vocab->size() ? v->vocab->lemma(id).c_str() : nullptr;
}

uint64_t comira_vocab_doc_freq(const comira_vocab* v, uint32_t id) {
  return v && id < v->vocab->size() ? v->vocab->doc_freq(id) : 0;
}

comira_status comira_vocab_find(const comira_vocab* v, const char* lemma, uint32_t* id) {
  return guard([&] { need(id, "id") = need(v, "vocab").vocab->id(need_str(lemma, "lemma")); });
}

const char* comira_vocab_fingerprint(const comira_vocab* v) { return v ? v->fingerprint.c_str() : nullptr; }

comira_status comira_vocab_concepts(const comira_vocab* v, const comira_normalizer* n, const char* text, uint32_t* ids,
                                    size_t capacity, size_t* count) {
  return guard([&] {
    need(count, "count");
    if (capacity > 0) need(ids, "ids");
    ConceptExtractor extractor(need(n, "normalizer").normalizer, *need(v, "vocab").vocab);
    auto found = extractor.ids(need_str(text, "text"));
    for (std::size_t i = 0; i < found.size() && i < capacity; ++i) ids[i] = found[i];
    *count = found.size();
  });
}

/* ---- counts ---- */

void comira_count_options_default(comira_count_options* o) {
  if (!o) return;
  CountOptions d;
  *o = {0, d.per_doc_cap, d.memory_budget_bytes, nullptr};
}

comira_status comira_counts_build(const comira_normalizer* n, const comira_vocab* v, const char* corpus_path,
                                  const char* format, const comira_count_options* options, comira_count_stats* stats,
                                  comira_counts** out) {
  return guard([&] {
    need(out, "out");
    auto fmt = CorpusFormat::parse(format ? format : "plain");
    CountStats s;
    auto table = count_pairs(need_str(corpus_path, "corpus_path"), fmt, need(n, "normalizer").normalizer,
                             *need(v, "vocab").vocab, count_options(options), &s);
    fill_stats(s, stats);
    *out = wrap_counts(std::move(table));
  });
}

comira_status comira_counts_build_ids(const comira_vocab* v, const uint32_t* ids, const size_t* offsets,
                                      size_t num_docs, const comira_count_options* options, comira_count_stats* stats,
                                      comira_counts** out) {
  return guard([&] {
    need(out, "out");
    need(offsets, "offsets");
    std::vector<std::vector<ConceptId>> docs(num_docs);
    for (std::size_t d = 0; d < num_docs; ++d) {
      if (offsets[d + 1] < offsets[d]) throw Error(Errc::invalid_argument, "offsets must be non-decreasing");
      if (offsets[d + 1] > offsets[d]) need(ids, "ids");
      docs[d].assign(ids + offsets[d], ids + offsets[d + 1]);
    }
    CountStats s;
    auto table = count_pairs(docs, *need(v, "vocab").vocab, count_options(options), &s);
    fill_stats(s, stats);
    *out = wrap_counts(std::move(table));
  });
}

comira_status comira_counts_merge(const comira_counts* const* parts, size_t count, comira_counts** out) {
  return guard([&] {
    need(out, "out");
    if (count == 0) throw Error(Errc::invalid_argument, "nothing to merge");
    need(parts, "parts");
    std::vector<PairCountTable> tables;
    for (std::size_t i = 0; i < count; ++i) tables.push_back(*need(parts[i], "part").counts);
    *out = wrap_counts(merge(tables));
  });
}

comira_status comira_counts_load(const char* path, comira_counts** out) {
  return guard([&] {
    need(out, "out");
    *out = wrap_counts(PairCountTable::load(need_str(path, "path")));
  });
}

comira_status comira_counts_save(const comira_counts* c, const char* path) {
  return guard([&] { need(c, "counts").counts->save(need_str(path, "path")); });
}

void comira_counts_free(comira_counts* c) { delete c; }

comira_status comira_counts_pair(const comira_counts* c, uint32_t a, uint32_t b, uint64_t* count) {
  return guard([&] {
    const auto& t = *need(c, "counts").counts;
    if (a >= t.vocab_size() || b >= t.vocab_size()) throw Error(Errc::unknown_concept, "concept id out of range");
    need(count, "count") = t.count(a, b);
  });
}

comira_status comira_counts_single(const comira_counts* c, uint32_t a, uint64_t* count) {
  return guard([&] {
    const auto& t = *need(c, "counts").counts;
    if (a >= t.vocab_size()) throw Error(Errc::unknown_concept, "concept id out of range");
    need(count, "count") = t.single(a);
  });
}

uint64_t comira_counts_num_docs(const comira_counts* c) { return c ? c->counts->num_docs() : 0; }

uint64_t comira_counts_num_pairs(const comira_counts* c) { return c ? c->counts->num_pairs() : 0; }

const char* comira_counts_fingerprint(const comira_counts* c) { return c ? c->fingerprint.c_str() : nullptr; }

/* ---- model ---- */

void comira_smoothing_default(comira_smoothing* s) {
  if (!s) return;
  SmoothingConfig d;
  *s = {d.alpha_pair, d.alpha_single, COMIRA_NORM_PAPER};
}

comira_status comira_model_new(const comira_vocab* v, const comira_counts* c, const comira_smoothing* s,
                               comira_model** out) {
  return guard([&] {
    need(out, "out");
    SmoothingConfig cfg;
    if (s) {
      cfg.alpha_pair = s->alpha_pair;
      cfg.alpha_single = s->alpha_single;
      if (s->normalization != COMIRA_NORM_PAPER && s->normalization != COMIRA_NORM_DOCUMENT_COUNT)
        throw Error(Errc::invalid_argument, "unknown normalization");
      cfg.mode = s->normalization == COMIRA_NORM_PAPER ? Normalization::paper : Normalization::document_count;
    }
    *out = new comira_model{PmiModel(need(v, "vocab").vocab, need(c, "counts").counts, cfg)};
  });
}

void comira_model_free(comira_model* m) { delete m; }

comira_status comira_model_single_prob(const comira_model* m, uint32_t a, double* out) {
  return guard([&] { need(out, "out") = need(m, "model").model.single_prob(a); });
}

comira_status comira_model_pair_prob(const comira_model* m, uint32_t a, uint32_t b, double* out) {
  return guard([&] { need(out, "out") = need(m, "model").model.pair_prob(a, b); });
}

comira_status comira_model_pmi(const comira_model* m, uint32_t a, uint32_t b, double* out) {
  return guard([&] {
    if (a == b) throw Error(Errc::invalid_argument, "pmi needs two distinct concepts");
    need(out, "out") = need(m, "model").model.pmi(a, b);
  });
}

comira_status comira_model_pmi_lemmas(const comira_model* m, const char* a, const char* b, double* out) {
  return guard([&] {
    const auto& model = need(m, "model").model;
    auto ia = model.vocab().id(need_str(a, "a"));
    auto ib = model.vocab().id(need_str(b, "b"));
    if (ia == ib) throw Error(Errc::invalid_argument, "pmi needs two distinct concepts");
    need(out, "out") = model.pmi(ia, ib);
  });
}

comira_status comira_model_specific_correlation(const comira_model* m, const comira_normalizer* n,
                                                const char* corpus_path, const char* format, const uint32_t* ids,
                                                size_t count, unsigned workers, double* out) {
  return guard([&] {
    if (count > 0) need(ids, "ids");
    auto fmt = CorpusFormat::parse(format ? format : "plain");
    need(out, "out") = specific_correlation(need(m, "model").model, need_str(corpus_path, "corpus_path"), fmt,
                                            need(n, "normalizer").normalizer, std::span<const ConceptId>(ids, count),
                                            capi::workers_or_default(workers));
  });
}

comira_status comira_model_specific_correlation_count(const comira_model* m, uint64_t joint_count,
                                                      const uint32_t* ids, size_t count, double* out) {
  return guard([&] {
    if (count > 0) need(ids, "ids");
    need(out, "out") =
        specific_correlation(need(m, "model").model, joint_count, std::span<const ConceptId>(ids, count));
  });
}

/* ---- scoring ---- */

comira_status comira_scorer_new(const comira_model* m, const comira_normalizer* n, comira_scorer** out) {
  return guard([&] {
    need(out, "out");
    *out = new comira_scorer(need(m, "model").model, need(n, "normalizer").normalizer);
  });
}

void comira_scorer_free(comira_scorer* s) { delete s; }

comira_status comira_score_caption(const comira_scorer* s, const char* text, comira_score* out) {
  return guard([&] {
    auto score = need(s, "scorer").scorer.caption_mean_pmi(need_str(text, "text"));
    need(out, "out") = {score.mean_pmi, score.pair_count};
  });
}

comira_status comira_score_vqa(const comira_scorer* s, const char* question, const char* const* answers,
                               size_t num_answers, const char* ground_truth, int question_only, comira_score* out) {
  return guard([&] {
    VqaExample ex;
    ex.question = need_str(question, "question");
    ex.human_answers = capi::string_array(answers, num_answers, "answers");
    if (ground_truth) ex.ground_truth = ground_truth;
    else if (!question_only) ex.ground_truth = derive_ground_truth(ex.human_answers);
    const auto& scorer = need(s, "scorer").scorer;
    auto score = question_only ? scorer.question_only_pmi(ex) : scorer.vqa_example_pmi(ex);
    need(out, "out") = {score.mean_pmi, score.pair_count};
  });
}

comira_status comira_derive_ground_truth(const char* const* answers, size_t count, char** out) {
  return guard([&] {
    need(out, "out");
    *out = capi::dup_string(derive_ground_truth(capi::string_array(answers, count, "answers")));
  });
}

comira_status comira_score_file(const comira_scorer* s, const char* in_path, const char* out_path, const char* kind,
                                const char* id_field, const char* text_field, unsigned workers, int audit,
                                comira_score_stats* stats) {
  return guard([&] {
    ScoreInputOptions opt;
    opt.kind = parse_score_kind(kind ? kind : "caption");
    if (id_field) opt.id_field = id_field;
    if (text_field) opt.text_field = text_field;
    opt.workers = capi::workers_or_default(workers);
    opt.audit = audit != 0;
    auto st = score_file(need(s, "scorer").scorer, need_str(in_path, "in_path"), need_str(out_path, "out_path"), opt);
    if (stats) *stats = {st.examples, st.scored, st.undefined, st.non_finite, st.malformed};
  });
}

}  // extern "C"
