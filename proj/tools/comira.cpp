// comira command-line front end. Talks to the library only through comira.h.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "comira/comira.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitMismatch = 4;
constexpr int kExitExternal = 5;

int exit_code_for(comira_status s) {
  switch (s) {
    case COMIRA_OK: return kExitOk;
    case COMIRA_E_INVALID_ARGUMENT: return kExitUsage;
    case COMIRA_E_MISMATCH: return kExitMismatch;
    case COMIRA_E_EXTERNAL: return kExitExternal;
    case COMIRA_E_INTERNAL: return kExitInternal;
    default: return kExitInput;
  }
}

void print_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::json line = {{"error", kind}, {"message", message}, {"exit", code}};
  std::cerr << line.dump() << std::endl;
}

// Thrown by check(); carries the library status out to main.
struct Failure {
  comira_status status;
  std::string message;
};

void check(comira_status s) {
  if (s != COMIRA_OK) throw Failure{s, comira_last_error()};
}

std::size_t g_warnings = 0;

void log_to_stderr(int level, const char* message, void*) {
  if (level == 1) {
    ++g_warnings;
    std::cerr << "warning: " << message << '\n';
  } else {
    std::cerr << message << '\n';
  }
}

void warn(const std::string& message) { log_to_stderr(1, message.c_str(), nullptr); }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using NormalizerPtr = std::unique_ptr<comira_normalizer, Deleter<comira_normalizer, comira_normalizer_free>>;
using VocabPtr = std::unique_ptr<comira_vocab, Deleter<comira_vocab, comira_vocab_free>>;
using CountsPtr = std::unique_ptr<comira_counts, Deleter<comira_counts, comira_counts_free>>;
using ModelPtr = std::unique_ptr<comira_model, Deleter<comira_model, comira_model_free>>;
using ScorerPtr = std::unique_ptr<comira_scorer, Deleter<comira_scorer, comira_scorer_free>>;

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

unsigned cpu_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---- shared option groups ----

struct NormalizerArgs {
  std::string stopwords;
  std::string lemma_rules;

  void add(CLI::App* app) {
    app->add_option("--stopwords", stopwords, "Stopword list file (default: shipped list)");
    app->add_option("--lemma-rules", lemma_rules, "Lemma rule file (default: shipped rules)");
  }
  NormalizerPtr make(bool keep_yes_no = false) const {
    comira_normalizer* n = nullptr;
    check(comira_normalizer_new(opt_cstr(stopwords), opt_cstr(lemma_rules), keep_yes_no ? 1 : 0, &n));
    return NormalizerPtr(n);
  }
};

struct ModelArgs {
  std::string vocab;
  std::string counts;
  double alpha_pair = 1.0;
  double alpha_single = 1e4;
  std::string normalization = "paper";

  void add(CLI::App* app) {
    app->add_option("--vocab", vocab, "Vocabulary file")->required();
    app->add_option("--counts", counts, "Pair count table")->required();
    app->add_option("--alpha-pair", alpha_pair, "Additive smoothing for pair counts")->capture_default_str();
    app->add_option("--alpha-single", alpha_single, "Additive smoothing for single counts")->capture_default_str();
    app->add_option("--normalization", normalization, "Probability denominators")
        ->check(CLI::IsMember({"paper", "document-count"}))
        ->capture_default_str();
  }

  struct Loaded {
    VocabPtr vocab;
    CountsPtr counts;
    ModelPtr model;
  };

  Loaded load(const comira_normalizer* n) const {
    Loaded l;
    comira_vocab* v = nullptr;
    check(comira_vocab_load(vocab.c_str(), n, &v));
    l.vocab.reset(v);
    comira_counts* c = nullptr;
    check(comira_counts_load(counts.c_str(), &c));
    l.counts.reset(c);
    comira_smoothing s;
    comira_smoothing_default(&s);
    s.alpha_pair = alpha_pair;
    s.alpha_single = alpha_single;
    s.normalization = normalization == "paper" ? COMIRA_NORM_PAPER : COMIRA_NORM_DOCUMENT_COUNT;
    comira_model* m = nullptr;
    check(comira_model_new(l.vocab.get(), l.counts.get(), &s, &m));
    l.model.reset(m);
    return l;
  }
};

// ---- subcommands ----

struct Cli {
  CLI::App app{"Concept co-occurrence statistics, per-example scoring and evaluation reports", "comira"};
  unsigned workers = cpu_count();
  std::function<void()> action;

  Cli() {
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.set_version_flag("--version", std::string(comira_version()));
    app.require_subcommand(1);
    add_build_vocab();
    add_count_pairs();
    add_pmi_query();
    add_score("score-captions", "Score caption records by mean pairwise PMI", false);
    add_score("score-vqa", "Score VQA records by mean pairwise PMI", true);
    add_select_pairs();
    add_filter_accessories();
    add_sample_pairs();
    add_gen_prompts();
    add_edit_images();
    add_eval_report();
  }

  // Global options, then the chosen subcommand's options as a section; the
  // text is a valid --config file.
  std::string resolved_config() const {
    std::string out = "workers=" + std::to_string(workers) + "\n";
    for (const auto* sub : app.get_subcommands())
      out += "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
    return out;
  }

  template <class State>
  std::shared_ptr<State> state() {
    auto s = std::make_shared<State>();
    states.push_back(s);
    return s;
  }

  std::vector<std::shared_ptr<void>> states;

  void add_build_vocab() {
    struct S {
      NormalizerArgs norm;
      std::string corpus, format = "plain", out;
      std::uint64_t min_df = 10000;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("build-vocab", "Build the concept vocabulary from a caption corpus");
    sub->add_option("--corpus", s->corpus, "Caption corpus")->required();
    sub->add_option("--format", s->format, "plain, tsv:<col>, delim:<col>:<char> or json:<field>")
        ->capture_default_str();
    sub->add_option("--min-df", s->min_df, "Keep lemmas in more than this many documents")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--out", s->out, "Vocabulary output path")->required();
    s->norm.add(sub);
    sub->callback([this, s] {
      action = [this, s] {
        auto n = s->norm.make();
        comira_vocab* v = nullptr;
        check(comira_vocab_build(n.get(), s->corpus.c_str(), s->format.c_str(), s->min_df, workers, &v));
        VocabPtr vocab(v);
        check(comira_vocab_save(vocab.get(), s->out.c_str()));
        std::cerr << "vocabulary: " << comira_vocab_size(v) << " concepts over " << comira_vocab_num_docs(v)
                  << " documents, fingerprint " << comira_vocab_fingerprint(v) << '\n';
      };
    });
  }

  void add_count_pairs() {
    struct S {
      NormalizerArgs norm;
      std::string corpus, format = "plain", vocab, out, spill_dir;
      std::uint32_t per_doc_cap = 256;
      std::uint64_t memory_mb = 1024;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("count-pairs", "Count document co-occurrence of concept pairs");
    sub->add_option("--corpus", s->corpus, "Caption corpus")->required();
    sub->add_option("--format", s->format, "Corpus format, as for build-vocab")->capture_default_str();
    sub->add_option("--vocab", s->vocab, "Vocabulary built from the same corpus")->required();
    sub->add_option("--per-doc-cap", s->per_doc_cap, "Concepts per document entering pair counts")
        ->check(CLI::Range(2u, 1u << 20))
        ->capture_default_str();
    sub->add_option("--memory-mb", s->memory_mb, "In-memory budget before spilling sorted runs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--spill-dir", s->spill_dir, "Directory for spill runs (default: system temp)");
    sub->add_option("--out", s->out, "Pair count table output path")->required();
    s->norm.add(sub);
    sub->callback([this, s] {
      action = [this, s] {
        auto n = s->norm.make();
        comira_vocab* v = nullptr;
        check(comira_vocab_load(s->vocab.c_str(), n.get(), &v));
        VocabPtr vocab(v);
        comira_count_options o;
        comira_count_options_default(&o);
        o.workers = workers;
        o.per_doc_cap = s->per_doc_cap;
        o.memory_budget_bytes = s->memory_mb << 20;
        o.spill_dir = opt_cstr(s->spill_dir);
        comira_count_stats stats;
        comira_counts* c = nullptr;
        check(comira_counts_build(n.get(), v, s->corpus.c_str(), s->format.c_str(), &o, &stats, &c));
        CountsPtr counts(c);
        check(comira_counts_save(c, s->out.c_str()));
        std::cerr << "counts: " << stats.documents << " documents, " << comira_counts_num_pairs(c)
                  << " distinct pairs, " << stats.capped_documents << " capped documents, " << stats.spilled_runs
                  << " spilled runs, fingerprint " << comira_counts_fingerprint(c) << '\n';
      };
    });
  }

  void add_pmi_query() {
    struct S {
      NormalizerArgs norm;
      ModelArgs model;
      std::string pairs = "-", out = "-";
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("pmi-query", "Look up PMI for lemma pairs");
    s->model.add(sub);
    s->norm.add(sub);
    sub->add_option("--pairs", s->pairs, "File of lemma1<TAB>lemma2 lines ('-' for stdin)")->capture_default_str();
    sub->add_option("--out", s->out, "Output file ('-' for stdout)")->capture_default_str();
    sub->callback([this, s] {
      action = [s] {
        auto n = s->norm.make();
        auto loaded = s->model.load(n.get());
        std::ifstream file;
        std::istream* in = &std::cin;
        if (s->pairs != "-") {
          file.open(s->pairs);
          if (!file) throw Failure{COMIRA_E_IO, "cannot open " + s->pairs};
          in = &file;
        }
        std::ostringstream result;
        std::string line;
        std::size_t lineno = 0, unknown = 0;
        while (std::getline(*in, line)) {
          ++lineno;
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          auto tab = line.find('\t');
          if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw Failure{COMIRA_E_FORMAT, s->pairs + ":" + std::to_string(lineno) + ": expected lemma1<TAB>lemma2"};
          std::string a = line.substr(0, tab), b = line.substr(tab + 1);
          double pmi = 0;
          auto st = comira_model_pmi_lemmas(loaded.model.get(), a.c_str(), b.c_str(), &pmi);
          result << a << '\t' << b << '\t';
          if (st == COMIRA_E_UNKNOWN_CONCEPT) {
            ++unknown;
            warn(std::string("line ") + std::to_string(lineno) + ": " + comira_last_error());
            result << "NA\n";
          } else {
            check(st);
            result << format_double(pmi) << '\n';
          }
        }
        if (s->out == "-") {
          std::cout << result.str() << std::flush;
        } else {
          std::ofstream out(s->out, std::ios::binary);
          out << result.str();
          if (!out) throw Failure{COMIRA_E_IO, "cannot write " + s->out};
        }
        if (unknown > 0) std::cerr << unknown << " pair(s) with unknown lemmas reported as NA\n";
      };
    });
  }

  void add_score(const char* name, const char* description, bool vqa) {
    struct S {
      NormalizerArgs norm;
      ModelArgs model;
      std::string in, out, id_field = "example_id", text_field = "caption";
      bool question_only = false;
      bool audit = false;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand(name, description);
    s->model.add(sub);
    s->norm.add(sub);
    sub->add_option("--in", s->in, "JSON-record input file")->required();
    sub->add_option("--out", s->out, "Score file output path")->required();
    sub->add_option("--id-field", s->id_field, "Record field holding the example id")->capture_default_str();
    if (vqa)
      sub->add_flag("--question-only", s->question_only, "Score question concepts only, without yes/no");
    else
      sub->add_option("--text-field", s->text_field, "Record field holding the caption")->capture_default_str();
    sub->add_flag("--audit", s->audit, "Write the per-pair PMI values of every example");
    sub->callback([this, s, vqa] {
      action = [this, s, vqa] {
        auto n = s->norm.make();
        auto loaded = s->model.load(n.get());
        comira_scorer* sc = nullptr;
        check(comira_scorer_new(loaded.model.get(), n.get(), &sc));
        ScorerPtr scorer(sc);
        const char* kind = !vqa ? "caption" : s->question_only ? "vqa-question-only" : "vqa";
        comira_score_stats st;
        check(comira_score_file(sc, s->in.c_str(), s->out.c_str(), kind, s->id_field.c_str(), s->text_field.c_str(),
                                workers, s->audit ? 1 : 0, &st));
        std::cerr << "scored " << st.scored << " of " << st.examples << " examples (" << st.undefined
                  << " undefined, " << st.non_finite << " non-finite, " << st.malformed << " malformed)\n";
      };
    });
  }

  void add_select_pairs() {
    struct S {
      NormalizerArgs norm;
      ModelArgs model;
      std::string classes, out;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("select-pairs", "Pair every vocabulary concept with every class category");
    s->model.add(sub);
    s->norm.add(sub);
    sub->add_option("--classes", s->classes, "Class list: '<id>\\t<name>' or bare names")->required();
    sub->add_option("--out", s->out, "Candidate pairs CSV")->required();
    sub->callback([this, s] {
      action = [s] {
        auto n = s->norm.make();
        auto loaded = s->model.load(n.get());
        comira_select_stats st;
        check(comira_select_pairs(loaded.model.get(), n.get(), s->classes.c_str(), s->out.c_str(), &st));
        std::cerr << st.classes << " classes, " << st.categories << " categories, " << st.pairs
                  << " candidate pairs\n";
      };
    });
  }

  void add_filter_accessories() {
    struct S {
      std::string pairs, lexicon, llm_config, out, retry_out, report;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("filter-accessories", "Drop accessory concepts that cannot be depicted");
    sub->add_option("--pairs", s->pairs, "Candidate pairs CSV")->required();
    sub->add_option("--lexicon", s->lexicon, "Lexicon TSV (default: shipped lexicon)");
    sub->add_option("--llm-config", s->llm_config, "Text-generation client config; omit to skip the LLM stage");
    sub->add_option("--out", s->out, "Kept pairs CSV")->required();
    sub->add_option("--retry-out", s->retry_out, "Pairs whose LLM call failed");
    sub->add_option("--report", s->report, "Per-stage drop counts (JSON)");
    sub->callback([this, s] {
      action = [s] {
        comira_filter_stats st{};
        auto status = comira_filter_accessories(s->pairs.c_str(), opt_cstr(s->lexicon), opt_cstr(s->llm_config),
                                                s->out.c_str(), opt_cstr(s->retry_out), opt_cstr(s->report), &st);
        std::cerr << "kept " << st.kept_accessories << " of " << st.input_accessories << " accessories ("
                  << st.kept_pairs << " pairs); dropped digit=" << st.dropped_digit
                  << " dictionary=" << st.dropped_dictionary << " pos=" << st.dropped_pos
                  << " literal=" << st.dropped_literal << " llm=" << st.dropped_llm
                  << " llm_unparseable=" << st.dropped_llm_unparseable << "; retryable "
                  << st.retryable_accessories << '\n';
        check(status);
      };
    });
  }

  void add_sample_pairs() {
    struct S {
      std::string pairs, out;
      std::size_t target = 200000, strata = 20;
      std::uint64_t seed = 0;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("sample-pairs", "Stratified sample of pairs across the PMI range");
    sub->add_option("--pairs", s->pairs, "Pairs CSV with pmi")->required();
    sub->add_option("--target", s->target, "Pairs to draw")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--strata", s->strata, "Equal-width PMI strata")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", s->seed, "Sampling seed")->capture_default_str();
    sub->add_option("--out", s->out, "Sampled pairs CSV")->required();
    sub->callback([this, s] {
      action = [s] { check(comira_sample_pairs(s->pairs.c_str(), s->target, s->strata, s->seed, s->out.c_str())); };
    });
  }

  void add_gen_prompts() {
    struct S {
      std::string pairs, out, llm_config, image_config, image_dir, accessory_dir;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("gen-prompts", "Render generation jobs and optionally call the generators");
    sub->add_option("--pairs", s->pairs, "Pairs CSV")->required();
    sub->add_option("--out", s->out, "Job records (JSON lines)")->required();
    sub->add_option("--llm-config", s->llm_config, "Caption LLM client config");
    sub->add_option("--image-config", s->image_config, "Image generator client config");
    sub->add_option("--image-dir", s->image_dir, "Where pair images go");
    sub->add_option("--accessory-dir", s->accessory_dir, "Where accessory images go");
    sub->callback([this, s] {
      action = [s] {
        comira_gen_stats st{};
        auto status = comira_gen_prompts(s->pairs.c_str(), s->out.c_str(), opt_cstr(s->llm_config),
                                         opt_cstr(s->image_config), opt_cstr(s->image_dir),
                                         opt_cstr(s->accessory_dir), &st);
        std::cerr << st.jobs << " jobs, " << st.captions << " captions (" << st.caption_failures << " failed), "
                  << st.images << " images (" << st.image_failures << " failed), " << st.accessory_images
                  << " accessory images (" << st.accessory_failures << " failed)\n";
        check(status);
      };
    });
  }

  void add_edit_images() {
    struct S {
      std::string pairs, bases, accessories, out_dir;
      comira_edit_options opts{};
      unsigned white_threshold = 0;
    };
    auto s = state<S>();
    comira_edit_options_default(&s->opts);
    s->white_threshold = s->opts.white_threshold;
    auto* sub = app.add_subcommand("edit-images", "Paste accessory images onto base images");
    sub->add_option("--pairs", s->pairs, "Pairs CSV")->required();
    sub->add_option("--bases", s->bases, "Base image index: '<class_id>\\t<path>' lines")->required();
    sub->add_option("--accessories", s->accessories, "Accessory image index: '<lemma>\\t<path>' lines")->required();
    sub->add_option("--out-dir", s->out_dir, "Output directory for images and manifest.csv")->required();
    sub->add_option("--seed", s->opts.seed, "Run seed")->capture_default_str();
    sub->add_option("--bases-per-pair", s->opts.bases_per_pair, "Base images edited per pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--max-area", s->opts.max_area_fraction, "Largest accessory area as a fraction of the base")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--white-threshold", s->white_threshold, "Channel level treated as white background")
        ->check(CLI::Range(0u, 255u))
        ->capture_default_str();
    sub->callback([this, s] {
      action = [this, s] {
        s->opts.workers = workers;
        s->opts.white_threshold = static_cast<std::uint8_t>(s->white_threshold);
        comira_edit_stats st{};
        check(comira_edit_images(s->pairs.c_str(), s->bases.c_str(), s->accessories.c_str(), s->out_dir.c_str(),
                                 &s->opts, &st));
        std::cerr << st.rows << " rows: " << st.generated << " generated, " << st.reused << " reused, " << st.errors
                  << " errors\n";
      };
    });
  }

  void add_eval_report() {
    struct S {
      std::string scores, preds, task = "clf", out, vocab;
      std::size_t bins = 20, top_k = 1;
      double tail = 0.05;
      bool simple_vqa = false, exclude_yes_no = false;
    };
    auto s = state<S>();
    auto* sub = app.add_subcommand("eval-report", "Join scores with predictions and report accuracy against PMI");
    sub->add_option("--scores", s->scores, "Score file")->required();
    sub->add_option("--preds", s->preds, "Prediction file (JSON lines)")->required();
    sub->add_option("--task", s->task, "clf, vqa or vqa-yesno")
        ->check(CLI::IsMember({"clf", "vqa", "vqa-yesno"}))
        ->capture_default_str();
    sub->add_option("--bins", s->bins, "Quantile bins")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tail", s->tail, "Tail fraction for the accuracy gap")->capture_default_str();
    sub->add_option("--top-k", s->top_k, "Top-k for classification correctness")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--simple-vqa", s->simple_vqa, "Use min(matches/3, 1) instead of leave-one-out VQA accuracy");
    sub->add_flag("--exclude-yes-no", s->exclude_yes_no, "vqa: drop questions answered yes or no");
    sub->add_option("--vocab", s->vocab, "Vocabulary to verify the score file against");
    sub->add_option("--out", s->out, "Report path (.json, or .csv for the per-bin table)")->required();
    sub->callback([this, s] {
      action = [s] {
        comira_eval_options o;
        comira_eval_options_default(&o);
        o.task = s->task.c_str();
        o.num_bins = s->bins;
        o.tail_fraction = s->tail;
        o.top_k = s->top_k;
        o.vqa_official = s->simple_vqa ? 0 : 1;
        o.exclude_yes_no = s->exclude_yes_no ? 1 : 0;
        o.vocab_path = opt_cstr(s->vocab);
        comira_eval_summary sum{};
        check(comira_eval_report(s->scores.c_str(), s->preds.c_str(), &o, s->out.c_str(), &sum));
        std::cerr << sum.records << " records (" << sum.excluded << " excluded, " << sum.unscored << " unscored, "
                  << sum.unpredicted << " without prediction, " << sum.filtered << " filtered); pearson_r "
                  << format_double(sum.pearson_r) << ", accuracy_gap " << format_double(sum.accuracy_gap) << '\n';
      };
    });
  }
};

}  // namespace

int main(int argc, char** argv) {
  comira_set_log_callback(&log_to_stderr, nullptr);
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.app.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e);
    print_error("usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  std::cerr << "# resolved config\n" << cli.resolved_config() << std::flush;
  try {
    cli.action();
  } catch (const Failure& f) {
    const int code = exit_code_for(f.status);
    print_error(comira_status_name(f.status), f.message, code);
    return code;
  } catch (const std::exception& e) {
    print_error("internal", e.what(), kExitInternal);
    return kExitInternal;
  }
  if (g_warnings > 0) std::cerr << g_warnings << " warning(s)\n";
  return kExitOk;
}
