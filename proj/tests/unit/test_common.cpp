#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "support/test_util.hpp"

using namespace comira;

TEST_CASE("sha256 matches published test vectors") {
  CHECK(to_hex(sha256("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(to_hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(sha256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("incremental sha256 equals one-shot") {
  Sha256 h;
  h.update(std::string_view("ab"));
  h.update(std::string_view("c"));
  CHECK(h.finish() == sha256("abc"));
}

TEST_CASE("hex round trip and rejection") {
  auto d = sha256("x");
  CHECK(digest_from_hex(to_hex(d)) == d);
  CHECK_THROWS_AS(digest_from_hex("abc"), Error);
  CHECK_THROWS_AS(digest_from_hex(std::string(64, 'g')), Error);
}

TEST_CASE("fnv1a64 and splitmix64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
}

TEST_CASE("SeededRng follows the standard mt19937_64 sequence") {
  SeededRng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("bounded draws stay in range and cover it") {
  SeededRng rng(42);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto x = rng.below(7);
    REQUIRE(x < 7);
    ++hist[x];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 600);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  CHECK(rng.below(1) == 0);
}

TEST_CASE("derive_seed is deterministic and id-sensitive") {
  CHECK(SeededRng::derive_seed(1, "a") == SeededRng::derive_seed(1, "a"));
  CHECK(SeededRng::derive_seed(1, "a") != SeededRng::derive_seed(1, "b"));
  CHECK(SeededRng::derive_seed(1, "a") != SeededRng::derive_seed(2, "a"));
}

TEST_CASE("csv quoting round trips") {
  std::vector<std::string> row = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  auto text = csv_row(row) + csv_row({"a", "b", "c", "d", "e"});
  auto parsed = parse_csv(text);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == row);
  CHECK(csv_field("x,y") == "\"x,y\"");
  CHECK(csv_field("xy") == "xy");
}

TEST_CASE("csv parser rejects an unterminated quote") { CHECK_THROWS_AS(parse_csv("\"abc\n"), Error); }

TEST_CASE("format_double round trips exactly") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = dist(gen);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isinf(parse_double("-inf")));
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("text helpers") {
  CHECK(to_lower_ascii("AbC") == "abc");
  CHECK(trim("  x y \t\n") == "x y");
  auto parts = split("a\tb\t\tc", '\t');
  REQUIRE(parts.size() == 4);
  CHECK(parts[2].empty());
}

TEST_CASE("atomic write replaces content") {
  testutil::TempDir dir;
  auto path = dir.file("f.txt");
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  CHECK(read_file(path) == "two");
  CHECK_THROWS_AS(read_file(dir.file("missing")), Error);
}

TEST_CASE("parallel_chunks covers every index exactly once") {
  for (unsigned workers : {1u, 3u, 8u}) {
    std::vector<int> hits(1001, 0);
    parallel_chunks(hits.size(), workers, [&](unsigned, std::size_t b, std::size_t e) {
      for (auto i = b; i < e; ++i) ++hits[i];
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("parallel_chunks propagates worker exceptions") {
  CHECK_THROWS_AS(parallel_chunks(100, 4,
                                  [](unsigned w, std::size_t, std::size_t) {
                                    if (w == 2) throw Error(Errc::internal, "boom");
                                  }),
                  Error);
}
