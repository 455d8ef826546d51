/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include <comira/comira.h>

static int failures = 0;
static int checks = 0;

#define CHECK(cond)                                                    \
  do {                                                                 \
    ++checks;                                                          \
    if (!(cond)) {                                                     \
      ++failures;                                                      \
      fprintf(stderr, "%s:%d: CHECK failed: %s\n", __FILE__, __LINE__, #cond); \
    }                                                                  \
  } while (0)

#define CHECK_OK(call)                                                                            \
  do {                                                                                            \
    comira_status st_ = (call);                                                                   \
    ++checks;                                                                                     \
    if (st_ != COMIRA_OK) {                                                                       \
      ++failures;                                                                                 \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, comira_status_name(st_), \
              comira_last_error());                                                               \
    }                                                                                             \
  } while (0)

static int warnings = 0;
static void count_log(int level, const char* message, void* user) {
  (void)message;
  if (level == 1) ++*(int*)user;
}

static void write_file(const char* path, const char* text) {
  FILE* f = fopen(path, "wb");
  fputs(text, f);
  fclose(f);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  char corpus[1024], vocab_path[1024], counts_path[1024], junk_path[1024];
  snprintf(corpus, sizeof corpus, "%s/capi_corpus.txt", dir);
  snprintf(vocab_path, sizeof vocab_path, "%s/capi.vocab", dir);
  snprintf(counts_path, sizeof counts_path, "%s/capi.cmr", dir);
  snprintf(junk_path, sizeof junk_path, "%s/capi_junk.cmr", dir);

  CHECK(comira_version() != NULL && strlen(comira_version()) > 0);
  CHECK(strcmp(comira_status_name(COMIRA_E_MISMATCH), "pipeline-mismatch") == 0);
  comira_set_log_callback(count_log, &warnings);

  /* normalization */
  comira_normalizer* norm = NULL;
  CHECK_OK(comira_normalizer_new(NULL, NULL, 0, &norm));
  comira_strings* lemmas = NULL;
  CHECK_OK(comira_normalizer_normalize(norm, "The cats are running", &lemmas));
  CHECK(comira_strings_size(lemmas) == 2);
  CHECK(strcmp(comira_strings_get(lemmas, 0), "cat") == 0);
  CHECK(strcmp(comira_strings_get(lemmas, 1), "run") == 0);
  CHECK(comira_strings_get(lemmas, 2) == NULL);
  comira_strings_free(lemmas);
  char* lemma = NULL;
  CHECK_OK(comira_lemmatize(norm, "dogs", &lemma));
  CHECK(lemma && strcmp(lemma, "dog") == 0);
  comira_string_free(lemma);
  comira_normalizer* missing = NULL;
  CHECK(comira_normalizer_new("/nonexistent/stopwords", NULL, 0, &missing) == COMIRA_E_IO);
  CHECK(missing == NULL);
  CHECK(strlen(comira_last_error()) > 0);

  /* vocabulary from a file corpus */
  write_file(corpus, "cat dog\ncat\ndog\ncat dog emu\nthe of\n");
  comira_vocab* vocab = NULL;
  CHECK_OK(comira_vocab_build(norm, corpus, "plain", 1, 2, &vocab));
  CHECK(comira_vocab_size(vocab) == 2);
  CHECK(comira_vocab_num_docs(vocab) == 5);
  uint32_t cat = 99, dog = 99, emu = 99;
  CHECK_OK(comira_vocab_find(vocab, "cat", &cat));
  CHECK_OK(comira_vocab_find(vocab, "dog", &dog));
  CHECK(comira_vocab_find(vocab, "emu", &emu) == COMIRA_E_UNKNOWN_CONCEPT);
  CHECK(comira_vocab_doc_freq(vocab, cat) == 3);
  CHECK(strcmp(comira_vocab_lemma(vocab, 0), "cat") == 0); /* tie broken lexicographically */
  CHECK(strlen(comira_vocab_fingerprint(vocab)) == 64);
  uint32_t ids[4];
  size_t n_ids = 0;
  CHECK_OK(comira_vocab_concepts(vocab, norm, "dogs and cats and emus", ids, 4, &n_ids));
  CHECK(n_ids == 2 && ids[0] == dog && ids[1] == cat);
  CHECK_OK(comira_vocab_save(vocab, vocab_path));
  comira_vocab* vocab2 = NULL;
  CHECK_OK(comira_vocab_load(vocab_path, norm, &vocab2));
  CHECK(strcmp(comira_vocab_fingerprint(vocab2), comira_vocab_fingerprint(vocab)) == 0);
  comira_vocab_free(vocab2);

  /* counts: corpus and id forms agree */
  comira_count_options opt;
  comira_count_options_default(&opt);
  CHECK(opt.per_doc_cap == 256);
  comira_count_stats stats;
  comira_counts* counts = NULL;
  CHECK_OK(comira_counts_build(norm, vocab, corpus, "plain", &opt, &stats, &counts));
  CHECK(stats.documents == 5);
  uint64_t c = 0;
  CHECK_OK(comira_counts_pair(counts, dog, cat, &c));
  CHECK(c == 2);
  CHECK_OK(comira_counts_single(counts, cat, &c));
  CHECK(c == 3);
  CHECK(comira_counts_pair(counts, cat, cat, &c) == COMIRA_E_INVALID_ARGUMENT);
  CHECK(strcmp(comira_counts_fingerprint(counts), comira_vocab_fingerprint(vocab)) == 0);

  uint32_t flat[] = {cat, dog, cat, dog, cat, dog};
  size_t offsets[] = {0, 2, 3, 4, 6, 6};
  comira_counts* by_ids = NULL;
  CHECK_OK(comira_counts_build_ids(vocab, flat, offsets, 5, &opt, NULL, &by_ids));
  CHECK_OK(comira_counts_pair(by_ids, cat, dog, &c));
  CHECK(c == 2);
  const comira_counts* parts[2] = {counts, by_ids};
  comira_counts* merged = NULL;
  CHECK_OK(comira_counts_merge(parts, 2, &merged));
  CHECK(comira_counts_num_docs(merged) == 10);
  comira_counts_free(merged);
  comira_counts_free(by_ids);

  CHECK_OK(comira_counts_save(counts, counts_path));
  comira_counts* loaded = NULL;
  CHECK_OK(comira_counts_load(counts_path, &loaded));
  CHECK(comira_counts_num_pairs(loaded) == 1);
  comira_counts_free(loaded);
  write_file(junk_path, "CMR1 but not really a table");
  comira_status junk = comira_counts_load(junk_path, &loaded);
  CHECK(junk == COMIRA_E_CORRUPT || junk == COMIRA_E_FORMAT);

  /* model */
  comira_smoothing sm;
  comira_smoothing_default(&sm);
  CHECK(sm.alpha_pair == 1.0 && sm.alpha_single == 1e4 && sm.normalization == COMIRA_NORM_PAPER);
  comira_model* model = NULL;
  CHECK_OK(comira_model_new(vocab, counts, &sm, &model));
  double pmi_ab = 0, pmi_ba = 0, v = 0;
  CHECK_OK(comira_model_pmi(model, cat, dog, &pmi_ab));
  CHECK_OK(comira_model_pmi_lemmas(model, "dog", "cat", &pmi_ba));
  CHECK(pmi_ab == pmi_ba);
  CHECK(comira_model_pmi_lemmas(model, "dog", "zebra", &v) == COMIRA_E_UNKNOWN_CONCEPT);
  CHECK_OK(comira_model_single_prob(model, cat, &v));
  CHECK(fabs(v - (3 + 1e4) / 2.0) < 1e-9);
  uint32_t pair_ids[2] = {cat, dog};
  CHECK_OK(comira_model_specific_correlation(model, norm, corpus, "plain", pair_ids, 2, 1, &v));
  CHECK(fabs(v - pmi_ab) <= 1e-12);

  comira_smoothing raw = {0, 0, COMIRA_NORM_DOCUMENT_COUNT};
  comira_model* raw_model = NULL;
  CHECK_OK(comira_model_new(vocab, counts, &raw, &raw_model));
  CHECK_OK(comira_model_pair_prob(raw_model, cat, dog, &v));
  CHECK(fabs(v - 2.0 / 5.0) < 1e-15);
  comira_model_free(raw_model);
  comira_smoothing bad = {-1, 0, COMIRA_NORM_PAPER};
  CHECK(comira_model_new(vocab, counts, &bad, &raw_model) == COMIRA_E_INVALID_ARGUMENT);

  const char* other_texts[] = {"cat dog", "cat dog", "cat", "dog"};
  comira_vocab* other = NULL;
  CHECK_OK(comira_vocab_build_texts(norm, other_texts, 4, 1, 1, &other));
  comira_model* wrong = NULL;
  CHECK(comira_model_new(other, counts, &sm, &wrong) == COMIRA_E_MISMATCH);
  CHECK(strstr(comira_last_error(), comira_vocab_fingerprint(other)) != NULL);
  comira_counts* stale = NULL;
  CHECK(comira_counts_build(norm, other, corpus, "plain", &opt, NULL, &stale) == COMIRA_E_MISMATCH);
  CHECK(stale == NULL);
  comira_vocab_free(other);

  /* an empty vocabulary is a warning routed to the callback */
  const char* one_text[] = {"cat"};
  comira_vocab* empty = NULL;
  CHECK_OK(comira_vocab_build_texts(norm, one_text, 1, 5, 1, &empty));
  CHECK(comira_vocab_size(empty) == 0);
  CHECK(warnings == 1);
  comira_vocab_free(empty);

  /* scoring */
  comira_scorer* scorer = NULL;
  CHECK_OK(comira_scorer_new(model, norm, &scorer));
  comira_score score;
  CHECK_OK(comira_score_caption(scorer, "A dog chasing a cat", &score));
  CHECK(score.pair_count == 1 && score.mean_pmi == pmi_ab);
  CHECK(comira_score_caption(scorer, "the of and", &score) == COMIRA_E_UNDEFINED);
  const char* answers[] = {"dog", "dog", "cat"};
  CHECK_OK(comira_score_vqa(scorer, "what is the cat chasing?", answers, 3, NULL, 0, &score));
  CHECK(score.pair_count == 1);
  char* truth = NULL;
  CHECK_OK(comira_derive_ground_truth(answers, 3, &truth));
  CHECK(truth && strcmp(truth, "dog") == 0);
  comira_string_free(truth);

  /* metrics */
  const char* ten3[] = {"yes", "yes", "yes", "no", "no", "no", "no", "no", "no", "no"};
  CHECK_OK(comira_vqa_accuracy("yes", ten3, 10, 1, &v));
  CHECK(fabs(v - 0.9) < 1e-15);
  double xs[] = {0, 1, 2, 3}, ys[] = {0, 1, 0, 1};
  CHECK_OK(comira_pearson_r(xs, ys, 4, &v));
  CHECK(fabs(v - 0.4472) < 1e-4);
  double flat_y[] = {1, 1, 1, 1};
  CHECK(comira_pearson_r(xs, flat_y, 4, &v) == COMIRA_E_UNDEFINED);
  const char* ranked[] = {"cat", "dog"};
  int hit = -1;
  CHECK_OK(comira_topk_correct(ranked, 2, "dog", 1, &hit));
  CHECK(hit == 0);
  comira_eval_record recs[40];
  char names[40][8];
  for (int i = 0; i < 40; ++i) {
    snprintf(names[i], sizeof names[i], "r%02d", i);
    recs[i].example_id = names[i];
    recs[i].pmi = i;
    recs[i].correctness = i >= 20 ? 1.0 : 0.0;
  }
  CHECK_OK(comira_accuracy_gap(recs, 40, 0.05, &v));
  CHECK(v == 1.0);
  comira_bin bins[4];
  CHECK_OK(comira_bin_accuracy(recs, 40, 4, bins));
  CHECK(bins[0].n == 10 && bins[0].accuracy == 0.0 && bins[3].accuracy == 1.0);

  /* prompts */
  const char* keys[] = {"c1", "c2"};
  const char* vals[] = {"broom", "spaniel"};
  char* prompt = NULL;
  CHECK_OK(comira_render_prompt("caption", keys, vals, 2, &prompt));
  CHECK(prompt && strstr(prompt, "the words 'broom' and 'spaniel'") != NULL);
  comira_string_free(prompt);
  CHECK(comira_render_prompt("nope", keys, vals, 2, &prompt) == COMIRA_E_INVALID_ARGUMENT);
  CHECK(comira_parse_llm_answer("The answer is yes") == 1);
  CHECK(comira_parse_llm_answer("The answer is no.") == 0);
  CHECK(comira_parse_llm_answer("I think so.") == -1);

  /* argument checks and NULL-tolerant frees */
  CHECK(comira_model_pmi(model, cat, dog, NULL) == COMIRA_E_INVALID_ARGUMENT);
  CHECK(comira_vocab_build(NULL, corpus, "plain", 1, 1, &vocab2) == COMIRA_E_INVALID_ARGUMENT);
  CHECK(comira_vocab_build(norm, corpus, "bogus", 1, 1, &vocab2) == COMIRA_E_INVALID_ARGUMENT);
  comira_vocab_free(NULL);
  comira_counts_free(NULL);
  comira_model_free(NULL);
  comira_scorer_free(NULL);
  comira_normalizer_free(NULL);
  comira_strings_free(NULL);
  comira_string_free(NULL);

  comira_scorer_free(scorer);
  comira_model_free(model);
  comira_counts_free(counts);
  comira_vocab_free(vocab);
  comira_normalizer_free(norm);
  comira_set_log_callback(NULL, NULL);

  remove(corpus);
  remove(vocab_path);
  remove(counts_path);
  remove(junk_path);
  printf("%d checks, %d failed\n", checks, failures);
  return failures == 0 ? 0 : 1;
}
