#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "common/error.hpp"
#include "concepts/normalizer.hpp"
#include "concepts/vocabulary.hpp"
#include "cooccur/count_pairs.hpp"
#include "cooccur/pair_table.hpp"
#include "pmi/pmi_model.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/test_util.hpp"

using namespace comira;

namespace {

using Docs = std::vector<std::vector<ConceptId>>;

oracle::PairCounts as_map(const PairCountTable& t) {
  oracle::PairCounts m;
  for (const auto& e : t.pairs()) m[{pair_lo(e.key), pair_hi(e.key)}] = e.count;
  return m;
}

std::vector<oracle::IdDoc> as_oracle_docs(const Docs& docs) { return {docs.begin(), docs.end()}; }

struct Hand {
  std::shared_ptr<ConceptVocabulary> vocab;
  Docs docs;
  PairCountTable table;
};

Hand hand_corpus(const std::vector<std::string>& texts) {
  Normalizer norm;
  Hand h;
  // Every concept is kept (threshold 0), which build_vocabulary does not allow.
  std::map<std::string, std::uint64_t> df;
  for (const auto& t : texts)
    for (auto& l : concept_set(norm, t)) ++df[l];
  h.vocab = std::make_shared<ConceptVocabulary>(ConceptVocabulary::from_doc_freqs(
      {df.begin(), df.end()}, texts.size(), 0, norm.config()));
  ConceptExtractor ex(norm, *h.vocab);
  for (const auto& t : texts) h.docs.push_back(ex.ids(t));
  h.table = count_pairs(h.docs, *h.vocab, {});
  return h;
}

PmiModel model_of(const Hand& h, SmoothingConfig s) {
  return PmiModel(h.vocab, std::make_shared<PairCountTable>(h.table), s);
}

oracle::PmiOracle oracle_of(const synth::Corpus& c, std::size_t num_concepts, oracle::Smoothing s) {
  oracle::PmiOracle o;
  for (const auto& d : c.docs) {
    std::set<std::string> words;
    for (auto w : d) words.insert(c.words[w]);
    o.docs.push_back(std::move(words));
  }
  o.num_concepts = num_concepts;
  o.s = s;
  return o;
}

}  // namespace

// ---- counting ----

TEST_CASE("three-document hand count") {
  auto h = hand_corpus({"cat dog", "cat", "dog"});
  auto cat = h.vocab->id("cat"), dog = h.vocab->id("dog");
  CHECK(h.table.count(cat, dog) == 1);
  CHECK(h.table.count(dog, cat) == 1);
  CHECK(h.table.single(cat) == 2);
  CHECK(h.table.single(dog) == 2);
  CHECK(h.table.num_docs() == 3);
  CHECK_THROWS_AS(h.table.count(cat, cat), Error);
}

TEST_CASE("duplicate tokens contribute once") {
  auto h = hand_corpus({"cat cat dog"});
  CHECK(h.table.count(h.vocab->id("cat"), h.vocab->id("dog")) == 1);
  CHECK(h.table.single(h.vocab->id("cat")) == 1);
}

TEST_CASE("id-document counting equals the brute-force oracle for any worker count") {
  Normalizer norm;
  auto c = synth::make_corpus(2000, 120, 12, 11, norm);
  auto idx = synth::index_corpus(c, norm);
  auto expected = oracle::count_pairs(as_oracle_docs(idx.id_docs));
  auto singles = oracle::count_singles(as_oracle_docs(idx.id_docs), idx.vocab->size());
  PairCountTable first;
  for (unsigned w : {1u, 2u, 4u, 16u}) {
    CountOptions opt;
    opt.workers = w;
    CountStats stats;
    auto t = count_pairs(idx.id_docs, *idx.vocab, opt, &stats);
    CHECK(as_map(t) == expected);
    CHECK(std::vector<std::uint64_t>(t.single_counts().begin(), t.single_counts().end()) == singles);
    CHECK(stats.documents == 2000);
    if (w == 1) first = t;
    CHECK(t == first);
  }
}

TEST_CASE("every document contributes k(k-1)/2 increments") {
  Normalizer norm;
  auto c = synth::make_corpus(300, 40, 10, 5, norm);
  auto idx = synth::index_corpus(c, norm);
  std::uint64_t expected = 0;
  for (const auto& d : idx.id_docs) {
    std::set<ConceptId> s(d.begin(), d.end());
    expected += s.size() * (s.size() - 1) / 2;
  }
  CountStats stats;
  auto t = count_pairs(idx.id_docs, *idx.vocab, {}, &stats);
  CHECK(stats.pair_increments == expected);
  std::uint64_t sum = 0;
  for (const auto& e : t.pairs()) sum += e.count;
  CHECK(sum == expected);
}

TEST_CASE("per-document cap truncates in first-occurrence order") {
  Normalizer norm;
  auto c = synth::make_corpus(500, 60, 20, 9, norm);
  auto idx = synth::index_corpus(c, norm);
  CountOptions opt;
  opt.per_doc_cap = 5;
  CountStats stats;
  auto t = count_pairs(idx.id_docs, *idx.vocab, opt, &stats);
  CHECK(as_map(t) == oracle::count_pairs(as_oracle_docs(idx.id_docs), 5));
  CHECK(stats.capped_documents > 0);
  CHECK((t.flags() & PairCountTable::kFlagCapped) != 0);
  CHECK(t.per_doc_cap() == 5);
}

TEST_CASE("spilling to sorted runs gives the same table") {
  Normalizer norm;
  auto c = synth::make_corpus(1500, 150, 14, 21, norm);
  auto idx = synth::index_corpus(c, norm);
  testutil::TempDir dir;
  auto in_memory = count_pairs(idx.id_docs, *idx.vocab, {});
  for (unsigned w : {1u, 3u}) {
    CountOptions opt;
    opt.workers = w;
    opt.memory_budget_bytes = 16 * 1024;
    opt.spill_dir = dir.path().string();
    CountStats stats;
    auto spilled = count_pairs(idx.id_docs, *idx.vocab, opt, &stats);
    CHECK(stats.spilled_runs > 0);
    CHECK(spilled == in_memory);
  }
}

TEST_CASE("counting from a corpus file equals counting its id documents") {
  Normalizer norm;
  auto c = synth::make_corpus(800, 80, 10, 3, norm);
  auto idx = synth::index_corpus(c, norm);
  testutil::TempDir dir;
  std::string text;
  for (const auto& t : c.texts) text += t + "\n";
  testutil::write_text(dir.file("c.txt"), text);
  auto by_ids = count_pairs(idx.id_docs, *idx.vocab, {});
  for (unsigned w : {1u, 4u}) {
    CountOptions opt;
    opt.workers = w;
    CHECK(count_pairs(dir.file("c.txt"), CorpusFormat::plain(), norm, *idx.vocab, opt) == by_ids);
  }
}

TEST_CASE("counting a corpus the vocabulary was not built from is a mismatch") {
  Normalizer norm;
  testutil::TempDir dir;
  testutil::write_text(dir.file("a.txt"), "cat dog\ncat\ndog\n");
  testutil::write_text(dir.file("b.txt"), "cat dog\ncat dog\ndog\n");
  auto vocab = build_vocabulary(dir.file("a.txt"), CorpusFormat::plain(), norm, 1, 1);
  CHECK_NOTHROW(count_pairs(dir.file("a.txt"), CorpusFormat::plain(), norm, vocab, {}));
  try {
    count_pairs(dir.file("b.txt"), CorpusFormat::plain(), norm, vocab, {});
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::mismatch);
    CHECK(std::string(e.what()).find(vocab.fingerprint_hex()) != std::string::npos);
  }
}

TEST_CASE("appending documents never decreases a count") {
  Normalizer norm;
  auto c = synth::make_corpus(600, 50, 8, 13, norm);
  auto idx = synth::index_corpus(c, norm);
  Docs half(idx.id_docs.begin(), idx.id_docs.begin() + 300);
  auto a = count_pairs(half, *idx.vocab, {});
  auto b = count_pairs(idx.id_docs, *idx.vocab, {});
  for (const auto& e : a.pairs()) CHECK(b.count(pair_lo(e.key), pair_hi(e.key)) >= e.count);
}

// ---- merge ----

TEST_CASE("merge identity, commutativity and shard equality") {
  Normalizer norm;
  auto c = synth::make_corpus(1000, 70, 10, 17, norm);
  auto idx = synth::index_corpus(c, norm);
  auto whole = count_pairs(idx.id_docs, *idx.vocab, {});
  std::vector<PairCountTable> shards;
  for (int s = 0; s < 4; ++s) {
    Docs part(idx.id_docs.begin() + s * 250, idx.id_docs.begin() + (s + 1) * 250);
    shards.push_back(count_pairs(part, *idx.vocab, {}));
  }
  CHECK(merge(shards) == whole);
  std::vector<PairCountTable> reversed(shards.rbegin(), shards.rend());
  CHECK(merge(reversed) == whole);
  std::vector<PairCountTable> ab = {shards[0], shards[1]}, ba = {shards[1], shards[0]};
  CHECK(merge(ab) == merge(ba));

  PairCountTable empty(whole.fingerprint(), 0, whole.per_doc_cap(), std::vector<std::uint64_t>(whole.vocab_size(), 0),
                       {});
  std::vector<PairCountTable> with_empty = {whole, empty};
  CHECK(merge(with_empty) == whole);
}

TEST_CASE("merge rejects tables from different pipelines") {
  auto a = hand_corpus({"cat dog", "cat"}).table;
  auto b = hand_corpus({"cat dog", "dog", "cat"}).table;
  std::vector<PairCountTable> both = {a, b};
  try {
    merge(both);
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::mismatch);
  }
}

// ---- binary format ----

TEST_CASE("pair table round trip is byte-stable") {
  auto h = hand_corpus({"cat dog", "cat", "dog"});
  testutil::TempDir dir;
  h.table.save(dir.file("t.cmr"));
  auto back = PairCountTable::load(dir.file("t.cmr"));
  CHECK(back == h.table);
  CHECK(back.serialize() == h.table.serialize());
  auto bytes = h.table.serialize();
  CHECK(bytes.substr(0, 4) == "CMR1");
  // header 4+2+1+32+8+4+4, singles 2*8, pair count 8, one entry 16, checksum 8
  CHECK(bytes.size() == 55 + 16 + 8 + 16 + 8);
}

TEST_CASE("damaged pair tables are rejected") {
  Normalizer norm;
  auto c = synth::make_corpus(100, 20, 6, 1, norm);
  auto idx = synth::index_corpus(c, norm);
  auto bytes = count_pairs(idx.id_docs, *idx.vocab, {}).serialize();

  auto rejects = [](const std::string& b) {
    try {
      PairCountTable::parse(b);
      return false;
    } catch (const Error& e) {
      return e.code() == Errc::corrupt || e.code() == Errc::format;
    }
  };
  for (std::size_t n = 0; n < bytes.size(); ++n) REQUIRE(rejects(bytes.substr(0, n)));
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto b = bytes;
    b[i] = static_cast<char>(b[i] ^ (1 << (i % 8)));
    REQUIRE(rejects(b));
  }
  CHECK(rejects(bytes + "x"));
  auto wrong_magic = bytes;
  wrong_magic[3] = '2';
  CHECK(rejects(wrong_magic));
  testutil::TempDir dir;
  CHECK_THROWS_AS(PairCountTable::load(dir.file("missing")), Error);
}

TEST_CASE("table and vocabulary must share a fingerprint") {
  auto h = hand_corpus({"cat dog", "cat", "dog"});
  auto other = hand_corpus({"cat dog", "cat", "dog", "cat"});
  CHECK_NOTHROW(h.table.require_matches(*h.vocab));
  CHECK_THROWS_AS(h.table.require_matches(*other.vocab), Error);
  CHECK_THROWS_AS(PmiModel(other.vocab, std::make_shared<PairCountTable>(h.table), {}), Error);
}

// ---- probabilities and pmi ----

TEST_CASE("hand-computed probabilities on the three-document corpus") {
  auto h = hand_corpus({"cat dog", "cat", "dog"});
  auto cat = h.vocab->id("cat"), dog = h.vocab->id("dog");
  auto paper = model_of(h, {0, 0, Normalization::paper});
  CHECK(paper.single_prob(cat) == 1.0);
  CHECK(paper.pair_prob(cat, dog) == 1.0);
  CHECK(paper.pmi(cat, dog) == 0.0);
  auto docs = model_of(h, {0, 0, Normalization::document_count});
  CHECK(docs.single_prob(cat) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(docs.pair_prob(cat, dog) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(paper.pair_prob(cat, cat), Error);
  CHECK_THROWS_AS(paper.single_prob(7), Error);
  CHECK_THROWS_AS(paper.pmi("cat", "zebra"), Error);
}

TEST_CASE("smoothing numerators") {
  auto h = hand_corpus({"cat dog", "cat", "dog", "emu"});
  auto cat = h.vocab->id("cat"), emu = h.vocab->id("emu");
  auto m = model_of(h, {1, 1e4, Normalization::paper});
  // |C| = 3, C(3,2) = 3
  CHECK(m.single_prob(cat) == doctest::Approx((2 + 1e4) / 3.0).epsilon(1e-15));
  CHECK(m.pair_prob(cat, emu) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(std::isfinite(m.pmi(cat, emu)));
  auto raw = model_of(h, {0, 0, Normalization::paper});
  CHECK(raw.pmi(cat, emu) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("negative or non-finite alphas are rejected") {
  CHECK_THROWS_AS((SmoothingConfig{-1, 0, Normalization::paper}.validate()), Error);
  CHECK_THROWS_AS((SmoothingConfig{0, std::nan(""), Normalization::paper}.validate()), Error);
  CHECK(parse_normalization("document-count") == Normalization::document_count);
  CHECK(std::string(normalization_name(Normalization::paper)) == "paper");
  CHECK_THROWS_AS(parse_normalization("other"), Error);
}

TEST_CASE("binomial") {
  CHECK(binomial(2, 2) == 1.0);
  CHECK(binomial(500, 2) == 124750.0);
  CHECK(binomial(10, 3) == 120.0);
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("pmi agrees with the full-scan oracle in both modes") {
  Normalizer norm;
  auto c = synth::make_corpus(1000, 100, 10, 23, norm);
  auto idx = synth::index_corpus(c, norm);
  auto table = std::make_shared<PairCountTable>(count_pairs(idx.id_docs, *idx.vocab, {}));
  const auto n = idx.vocab->size();
  for (auto [ap, as] : {std::pair{1.0, 1e4}, std::pair{0.5, 3.0}, std::pair{1.0, 0.0}}) {
    for (bool paper : {true, false}) {
      PmiModel m(idx.vocab, table, {ap, as, paper ? Normalization::paper : Normalization::document_count});
      auto o = oracle_of(c, n, {ap, as, paper});
      double worst = 0;
      for (ConceptId a = 0; a < n; ++a)
        for (ConceptId b = a + 1; b < n; ++b) {
          double got = m.pmi(a, b), want = o.pmi(idx.vocab->lemma(a), idx.vocab->lemma(b));
          if (std::isinf(want)) {
            REQUIRE(got == want);
            continue;
          }
          worst = std::max(worst, std::abs(got - want));
        }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("pmi is symmetric") {
  Normalizer norm;
  auto c = synth::make_corpus(1000, 100, 10, 29, norm);
  auto idx = synth::index_corpus(c, norm);
  PmiModel m(idx.vocab, std::make_shared<PairCountTable>(count_pairs(idx.id_docs, *idx.vocab, {})), {});
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<ConceptId> pick(0, static_cast<ConceptId>(idx.vocab->size() - 1));
  for (int i = 0; i < 10000; ++i) {
    auto a = pick(gen), b = pick(gen);
    if (a == b) continue;
    REQUIRE(m.pmi(a, b) == m.pmi(b, a));
    REQUIRE(m.pair_prob(a, b) == m.pair_prob(b, a));
  }
}

TEST_CASE("paper and document-count modes differ by a constant") {
  Normalizer norm;
  auto c = synth::make_corpus(900, 90, 10, 31, norm);
  auto idx = synth::index_corpus(c, norm);
  auto table = std::make_shared<PairCountTable>(count_pairs(idx.id_docs, *idx.vocab, {}));
  PmiModel paper(idx.vocab, table, {0, 0, Normalization::paper});
  PmiModel docs(idx.vocab, table, {0, 0, Normalization::document_count});
  const long double C = idx.vocab->size(), D = c.docs.size();
  const double offset = static_cast<double>(std::log(C * C / (oracle::choose(C, 2) * D)));
  double worst = 0;
  for (ConceptId a = 0; a < C; ++a)
    for (ConceptId b = a + 1; b < C; ++b) {
      double p = paper.pmi(a, b), d = docs.pmi(a, b);
      if (std::isinf(p)) {
        REQUIRE(std::isinf(d));
        continue;
      }
      worst = std::max(worst, std::abs((p - d) - offset));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("raising a pair count with fixed singles raises its pmi") {
  auto h = hand_corpus({"cat dog", "cat", "dog", "emu", "cat emu dog"});
  auto cat = h.vocab->id("cat"), dog = h.vocab->id("dog");
  auto singles = std::vector<std::uint64_t>(h.table.single_counts().begin(), h.table.single_counts().end());
  double prev = -std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k <= 3; ++k) {
    std::vector<PairEntry> entries = {{pack_pair(cat, dog), k}};
    if (k == 0) entries.clear();
    auto t = std::make_shared<PairCountTable>(h.vocab->fingerprint(), h.table.num_docs(), h.table.per_doc_cap(),
                                              singles, entries);
    double v = PmiModel(h.vocab, t, {}).pmi(cat, dog);
    CHECK(v > prev);
    prev = v;
  }
}

// ---- specific correlation ----

TEST_CASE("specific correlation of two concepts is pmi") {
  Normalizer norm;
  auto c = synth::make_corpus(1000, 100, 10, 37, norm);
  auto idx = synth::index_corpus(c, norm);
  auto table = std::make_shared<PairCountTable>(count_pairs(idx.id_docs, *idx.vocab, {}));
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<ConceptId> pick(0, static_cast<ConceptId>(idx.vocab->size() - 1));
  for (bool paper : {true, false}) {
    PmiModel m(idx.vocab, table, {1, 1e4, paper ? Normalization::paper : Normalization::document_count});
    for (int i = 0; i < 1000; ++i) {
      auto a = pick(gen), b = pick(gen);
      if (a == b) continue;
      std::vector<ConceptId> ab = {a, b};
      REQUIRE(std::abs(specific_correlation(m, idx.id_docs, ab) - m.pmi(a, b)) <= 1e-12);
    }
  }
}

TEST_CASE("three-way specific correlation hand case is log 2") {
  auto h = hand_corpus({"ant bee cow", "ant", "bee", "cow"});
  REQUIRE(h.vocab->size() == 3);
  auto m = model_of(h, {0, 0, Normalization::document_count});
  std::vector<ConceptId> abc = {h.vocab->id("ant"), h.vocab->id("bee"), h.vocab->id("cow")};
  CHECK(count_joint(h.docs, abc, h.table.per_doc_cap()) == 1);
  CHECK(std::abs(specific_correlation(m, h.docs, abc) - std::log(2.0)) <= 1e-12);

  testutil::TempDir dir;
  testutil::write_text(dir.file("c.txt"), "ant bee cow\nant\nbee\ncow\n");
  Normalizer norm;
  CHECK(std::abs(specific_correlation(m, dir.file("c.txt"), CorpusFormat::plain(), norm, abc, 2) - std::log(2.0)) <=
        1e-12);
}

TEST_CASE("specific correlation smoothing boundary and argument checks") {
  auto h = hand_corpus({"ant bee", "cow", "ant", "bee cow"});
  std::vector<ConceptId> abc = {h.vocab->id("ant"), h.vocab->id("bee"), h.vocab->id("cow")};
  CHECK(specific_correlation(model_of(h, {0, 0, Normalization::paper}), h.docs, abc) ==
        -std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(specific_correlation(model_of(h, {1, 0, Normalization::paper}), h.docs, abc)));
  auto m = model_of(h, {});
  std::vector<ConceptId> dup = {abc[0], abc[0]};
  std::vector<ConceptId> one = {abc[0]};
  CHECK_THROWS_AS(specific_correlation(m, h.docs, dup), Error);
  CHECK_THROWS_AS(specific_correlation(m, h.docs, one), Error);
}

TEST_CASE("three-way specific correlation agrees with the oracle") {
  Normalizer norm;
  auto c = synth::make_corpus(600, 30, 10, 41, norm);
  auto idx = synth::index_corpus(c, norm);
  auto table = std::make_shared<PairCountTable>(count_pairs(idx.id_docs, *idx.vocab, {}));
  for (bool paper : {true, false}) {
    PmiModel m(idx.vocab, table, {1, 2, paper ? Normalization::paper : Normalization::document_count});
    auto o = oracle_of(c, idx.vocab->size(), {1, 2, paper});
    for (ConceptId a = 0; a + 2 < 12; ++a) {
      std::vector<ConceptId> ids = {a, a + 1, a + 2};
      std::vector<std::string> names = {idx.vocab->lemma(a), idx.vocab->lemma(a + 1), idx.vocab->lemma(a + 2)};
      CHECK(std::abs(specific_correlation(m, idx.id_docs, ids) - o.si(names)) <= 1e-12);
    }
  }
}
