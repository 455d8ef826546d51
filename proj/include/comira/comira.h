/* comira: concept co-occurrence statistics (PMI) over caption corpora, with
 * per-example scoring, evaluation reports and dataset-construction stages.
 *
 * Conventions
 *   - Every fallible call returns comira_status. On failure, the message is
 *     available from comira_last_error() on the same thread until the next
 *     failing call.
 *   - Objects are opaque handles released with their *_free function; free
 *     functions accept NULL. Handles are immutable after construction and may
 *     be shared between threads.
 *   - Strings returned through char** are heap-allocated; release them with
 *     comira_string_free. Strings returned as const char* are owned by the
 *     handle they came from.
 *   - Paths and text are UTF-8. PMI values are natural logs.
 */
#ifndef COMIRA_COMIRA_H
#define COMIRA_COMIRA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COMIRA_API __declspec(dllexport)
#else
#define COMIRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum comira_status {
  COMIRA_OK = 0,
  COMIRA_E_INVALID_ARGUMENT = 1,
  COMIRA_E_IO = 2,
  COMIRA_E_CORRUPT = 3,
  COMIRA_E_FORMAT = 4,
  COMIRA_E_MISMATCH = 5, /* artifacts from different pipeline runs */
  COMIRA_E_UNDEFINED = 6, /* e.g. fewer than two concepts to score */
  COMIRA_E_EMPTY = 7,
  COMIRA_E_UNKNOWN_CONCEPT = 8,
  COMIRA_E_EXTERNAL = 9, /* generation service failure */
  COMIRA_E_INTERNAL = 10
} comira_status;

COMIRA_API const char* comira_version(void);
COMIRA_API const char* comira_status_name(comira_status status);
COMIRA_API const char* comira_last_error(void);
COMIRA_API void comira_string_free(char* s);

/* level: 0 info, 1 warning. Pass NULL to restore the stderr default. */
typedef void (*comira_log_fn)(int level, const char* message, void* user);
COMIRA_API void comira_set_log_callback(comira_log_fn fn, void* user);

/* ---- string lists ---- */
typedef struct comira_strings comira_strings;
COMIRA_API size_t comira_strings_size(const comira_strings* list);
COMIRA_API const char* comira_strings_get(const comira_strings* list, size_t i);
COMIRA_API void comira_strings_free(comira_strings* list);

/* ---- text normalization ---- */
typedef struct comira_normalizer comira_normalizer;

/* NULL paths select the shipped stopword list and lemma rules. keep_yes_no
 * exempts "yes" and "no" from stopword removal (VQA scoring). */
COMIRA_API comira_status comira_normalizer_new(const char* stopwords_path, const char* lemma_rules_path,
                                               int keep_yes_no, comira_normalizer** out);
COMIRA_API void comira_normalizer_free(comira_normalizer* n);
COMIRA_API comira_status comira_normalizer_normalize(const comira_normalizer* n, const char* text,
                                                     comira_strings** out);
COMIRA_API comira_status comira_lemmatize(const comira_normalizer* n, const char* word, char** out);

/* ---- concept vocabulary ---- */
typedef struct comira_vocab comira_vocab;

/* format: "plain", "tsv:<col>", "delim:<col>:<char>" or "json:<field>".
 * Keeps lemmas whose document frequency is strictly greater than
 * min_doc_freq. workers 0 means one per CPU. */
COMIRA_API comira_status comira_vocab_build(const comira_normalizer* n, const char* corpus_path, const char* format,
                                            uint64_t min_doc_freq, unsigned workers, comira_vocab** out);
/* Builds from in-memory documents (one caption per entry). */
COMIRA_API comira_status comira_vocab_build_texts(const comira_normalizer* n, const char* const* texts, size_t count,
                                                  uint64_t min_doc_freq, unsigned workers, comira_vocab** out);
/* When n is non-NULL the fingerprint is checked against it. */
COMIRA_API comira_status comira_vocab_load(const char* path, const comira_normalizer* n, comira_vocab** out);
COMIRA_API comira_status comira_vocab_save(const comira_vocab* v, const char* path);
COMIRA_API void comira_vocab_free(comira_vocab* v);
COMIRA_API size_t comira_vocab_size(const comira_vocab* v);
COMIRA_API uint64_t comira_vocab_num_docs(const comira_vocab* v);
COMIRA_API const char* comira_vocab_lemma(const comira_vocab* v, uint32_t id);
COMIRA_API uint64_t comira_vocab_doc_freq(const comira_vocab* v, uint32_t id);
COMIRA_API comira_status comira_vocab_find(const comira_vocab* v, const char* lemma, uint32_t* id);
COMIRA_API const char* comira_vocab_fingerprint(const comira_vocab* v); /* 64 hex digits */
/* Deduplicated in-vocabulary concept ids of text, in order of appearance.
 * *count receives the total; at most capacity ids are written. */
COMIRA_API comira_status comira_vocab_concepts(const comira_vocab* v, const comira_normalizer* n, const char* text,
                                               uint32_t* ids, size_t capacity, size_t* count);

/* ---- pair counts ---- */
typedef struct comira_counts comira_counts;

typedef struct comira_count_options {
  unsigned workers;             /* 0: one per CPU */
  uint32_t per_doc_cap;         /* concepts per document entering pair counts */
  uint64_t memory_budget_bytes; /* hash tables spill sorted runs beyond this */
  const char* spill_dir;        /* NULL: system temp directory */
} comira_count_options;

typedef struct comira_count_stats {
  uint64_t documents;
  uint64_t pair_increments;
  uint64_t capped_documents;
  uint64_t spilled_runs;
} comira_count_stats;

COMIRA_API void comira_count_options_default(comira_count_options* options);
COMIRA_API comira_status comira_counts_build(const comira_normalizer* n, const comira_vocab* v,
                                             const char* corpus_path, const char* format,
                                             const comira_count_options* options, comira_count_stats* stats,
                                             comira_counts** out);
/* Documents as concatenated id lists: document d is ids[offsets[d]..offsets[d+1]). */
COMIRA_API comira_status comira_counts_build_ids(const comira_vocab* v, const uint32_t* ids, const size_t* offsets,
                                                 size_t num_docs, const comira_count_options* options,
                                                 comira_count_stats* stats, comira_counts** out);
COMIRA_API comira_status comira_counts_merge(const comira_counts* const* parts, size_t count, comira_counts** out);
COMIRA_API comira_status comira_counts_load(const char* path, comira_counts** out);
COMIRA_API comira_status comira_counts_save(const comira_counts* c, const char* path);
COMIRA_API void comira_counts_free(comira_counts* c);
COMIRA_API comira_status comira_counts_pair(const comira_counts* c, uint32_t a, uint32_t b, uint64_t* count);
COMIRA_API comira_status comira_counts_single(const comira_counts* c, uint32_t a, uint64_t* count);
COMIRA_API uint64_t comira_counts_num_docs(const comira_counts* c);
COMIRA_API uint64_t comira_counts_num_pairs(const comira_counts* c);
COMIRA_API const char* comira_counts_fingerprint(const comira_counts* c);

/* ---- PMI model ---- */
typedef struct comira_model comira_model;

typedef enum comira_normalization {
  COMIRA_NORM_PAPER = 0,         /* singles over |C|, pairs over C(|C|,2) */
  COMIRA_NORM_DOCUMENT_COUNT = 1 /* singles over N + a*|C|, pairs over N + a*C(|C|,2) */
} comira_normalization;

typedef struct comira_smoothing {
  double alpha_pair;
  double alpha_single;
  comira_normalization normalization;
} comira_smoothing;

COMIRA_API void comira_smoothing_default(comira_smoothing* s);
/* Fails with COMIRA_E_MISMATCH when the counts were not built from v. */
COMIRA_API comira_status comira_model_new(const comira_vocab* v, const comira_counts* c, const comira_smoothing* s,
                                          comira_model** out);
COMIRA_API void comira_model_free(comira_model* m);
COMIRA_API comira_status comira_model_single_prob(const comira_model* m, uint32_t a, double* out);
COMIRA_API comira_status comira_model_pair_prob(const comira_model* m, uint32_t a, uint32_t b, double* out);
COMIRA_API comira_status comira_model_pmi(const comira_model* m, uint32_t a, uint32_t b, double* out);
COMIRA_API comira_status comira_model_pmi_lemmas(const comira_model* m, const char* a, const char* b, double* out);
/* log p(c1..cn) / prod p(ci), joint count from a scan of the corpus. */
COMIRA_API comira_status comira_model_specific_correlation(const comira_model* m, const comira_normalizer* n,
                                                           const char* corpus_path, const char* format,
                                                           const uint32_t* ids, size_t count, unsigned workers,
                                                           double* out);
COMIRA_API comira_status comira_model_specific_correlation_count(const comira_model* m, uint64_t joint_count,
                                                                 const uint32_t* ids, size_t count, double* out);

/* ---- scoring ---- */
typedef struct comira_scorer comira_scorer;

typedef struct comira_score {
  double mean_pmi;
  size_t pair_count;
} comira_score;

typedef struct comira_score_stats {
  uint64_t examples;
  uint64_t scored;
  uint64_t undefined;
  uint64_t non_finite;
  uint64_t malformed;
} comira_score_stats;

COMIRA_API comira_status comira_scorer_new(const comira_model* m, const comira_normalizer* n, comira_scorer** out);
COMIRA_API void comira_scorer_free(comira_scorer* s);
/* COMIRA_E_UNDEFINED when fewer than two concepts remain. */
COMIRA_API comira_status comira_score_caption(const comira_scorer* s, const char* text, comira_score* out);
/* ground_truth may be NULL to use the mode of the answers. question_only
 * scores the question's concepts without "yes" and "no". */
COMIRA_API comira_status comira_score_vqa(const comira_scorer* s, const char* question, const char* const* answers,
                                          size_t num_answers, const char* ground_truth, int question_only,
                                          comira_score* out);
COMIRA_API comira_status comira_derive_ground_truth(const char* const* answers, size_t count, char** out);
/* kind: "caption", "vqa" or "vqa-question-only". NULL fields use defaults
 * ("example_id", "caption"). */
COMIRA_API comira_status comira_score_file(const comira_scorer* s, const char* in_path, const char* out_path,
                                           const char* kind, const char* id_field, const char* text_field,
                                           unsigned workers, int audit, comira_score_stats* stats);

/* ---- evaluation ---- */
typedef struct comira_eval_record {
  const char* example_id;
  double pmi;
  double correctness;
} comira_eval_record;

typedef struct comira_bin {
  double pmi_mean;
  double accuracy;
  size_t n;
} comira_bin;

typedef struct comira_eval_options {
  const char* task; /* "clf", "vqa" or "vqa-yesno" */
  size_t num_bins;
  double tail_fraction;
  size_t top_k;       /* clf */
  int vqa_official;   /* nonzero: leave-one-out VQA accuracy */
  int exclude_yes_no; /* vqa: drop questions whose answer is yes or no */
  const char* vocab_path; /* optional: verify the score file's fingerprint */
} comira_eval_options;

typedef struct comira_eval_summary {
  uint64_t records;
  uint64_t excluded;
  uint64_t unscored;
  uint64_t unpredicted;
  uint64_t filtered;
  double pearson_r;        /* NaN when undefined */
  double record_pearson_r; /* NaN when undefined */
  double accuracy_gap;
} comira_eval_summary;

COMIRA_API void comira_eval_options_default(comira_eval_options* o);
COMIRA_API comira_status comira_vqa_accuracy(const char* prediction, const char* const* answers, size_t count,
                                             int official, double* out);
COMIRA_API comira_status comira_topk_correct(const char* const* ranked, size_t count, const char* label, size_t k,
                                             int* out);
COMIRA_API comira_status comira_pearson_r(const double* xs, const double* ys, size_t count, double* out);
COMIRA_API comira_status comira_accuracy_gap(const comira_eval_record* records, size_t count, double tail_fraction,
                                             double* out);
COMIRA_API comira_status comira_bin_accuracy(const comira_eval_record* records, size_t count, size_t num_bins,
                                             comira_bin* bins);
/* Joins predictions with scores and writes a report; ".csv" paths get the
 * per-bin CSV, anything else JSON. */
COMIRA_API comira_status comira_eval_report(const char* scores_path, const char* predictions_path,
                                            const comira_eval_options* options, const char* out_path,
                                            comira_eval_summary* summary);

/* ---- dataset construction ---- */
typedef struct comira_select_stats {
  uint64_t classes;
  uint64_t categories;
  uint64_t pairs;
} comira_select_stats;

/* Class list lines: "<id>\t<name>" or bare names. Writes a pairs CSV with
 * pmi filled from m. */
COMIRA_API comira_status comira_select_pairs(const comira_model* m, const comira_normalizer* n,
                                             const char* class_list_path, const char* out_path,
                                             comira_select_stats* stats);

typedef struct comira_filter_stats {
  uint64_t input_pairs;
  uint64_t input_accessories;
  uint64_t dropped_digit;
  uint64_t dropped_dictionary;
  uint64_t dropped_pos;
  uint64_t dropped_literal;
  uint64_t dropped_llm;
  uint64_t dropped_llm_unparseable;
  uint64_t kept_accessories;
  uint64_t retryable_accessories;
  uint64_t kept_pairs;
} comira_filter_stats;

/* lexicon_path NULL: shipped lexicon. llm_config_path NULL: skip the
 * visualizability stage. retry_path and report_path may be NULL. */
COMIRA_API comira_status comira_filter_accessories(const char* pairs_path, const char* lexicon_path,
                                                   const char* llm_config_path, const char* out_path,
                                                   const char* retry_path, const char* report_path,
                                                   comira_filter_stats* stats);
COMIRA_API comira_status comira_sample_pairs(const char* pairs_path, size_t target, size_t strata, uint64_t seed,
                                             const char* out_path);

/* template_name: "visualizability", "caption" or "accessory_image". */
COMIRA_API comira_status comira_render_prompt(const char* template_name, const char* const* keys,
                                              const char* const* values, size_t count, char** out);
/* Returns 1 for yes, 0 for no, -1 when unparseable. */
COMIRA_API int comira_parse_llm_answer(const char* response);

typedef struct comira_gen_stats {
  uint64_t jobs;
  uint64_t captions;
  uint64_t caption_failures;
  uint64_t images;
  uint64_t image_failures;
  uint64_t accessory_images;
  uint64_t accessory_failures;
} comira_gen_stats;

/* Config paths may be NULL. Image outputs need image_config_path and the
 * matching directory. */
COMIRA_API comira_status comira_gen_prompts(const char* pairs_path, const char* out_path,
                                            const char* llm_config_path, const char* image_config_path,
                                            const char* image_dir, const char* accessory_dir,
                                            comira_gen_stats* stats);

typedef struct comira_edit_options {
  uint64_t seed;
  size_t bases_per_pair;
  double max_area_fraction;
  uint8_t white_threshold;
  unsigned workers;
} comira_edit_options;

typedef struct comira_edit_stats {
  uint64_t rows;
  uint64_t generated;
  uint64_t reused;
  uint64_t errors;
} comira_edit_stats;

typedef struct comira_edit_spec {
  double scale;
  uint32_t x;
  uint32_t y;
  uint32_t width;
  uint32_t height;
} comira_edit_spec;

COMIRA_API void comira_edit_options_default(comira_edit_options* o);
COMIRA_API comira_status comira_edit_images(const char* pairs_path, const char* base_index_path,
                                            const char* accessory_index_path, const char* out_dir,
                                            const comira_edit_options* options, comira_edit_stats* stats);
/* Single paste; an RGB accessory is keyed on white first. */
COMIRA_API comira_status comira_paste_png(const char* base_path, const char* accessory_path, uint64_t seed,
                                          double max_area_fraction, uint8_t white_threshold, const char* out_path,
                                          comira_edit_spec* spec);

#ifdef __cplusplus
}
#endif

#endif /* COMIRA_COMIRA_H */
