#include <doctest.h>

#include <random>

#include "altrec/catalog.hpp"
#include "altrec/error.hpp"
#include "support/temp_dir.hpp"

using namespace altrec;
using altrec::testing::TempDir;

TEST_CASE("load_catalog reads a single catalog record") {
  TempDir dir;
  const auto path = dir.write("catalog.jsonl",
                              R"({"product_id": "12345678", "title": "60 Gal. Electric Air Compressor", )"
                              R"("description": "This compressor offers a solid cast iron, twin cylinder compressor pump."})"
                              "\n");
  const auto result = load_catalog(path);
  REQUIRE(result.products.size() == 1);
  CHECK(result.products[0].product_id == "12345678");
  CHECK(result.products[0].title == "60 Gal. Electric Air Compressor");
  CHECK(result.products[0].description.starts_with("This compressor offers"));
  CHECK(result.malformed_lines == 0);
}

TEST_CASE("load_catalog edge cases") {
  TempDir dir;
  SUBCASE("empty file") { CHECK(load_catalog(dir.write("c.jsonl", "")).products.empty()); }
  SUBCASE("duplicate id aborts") {
    const auto path = dir.write("c.jsonl",
                                R"({"product_id":"a","title":"x","description":""})" "\n"
                                R"({"product_id":"a","title":"y","description":""})" "\n");
    CHECK_THROWS_AS(load_catalog(path), DuplicateIdError);
  }
  SUBCASE("malformed lines are skipped, counted and located") {
    const auto path = dir.write("c.jsonl",
                                R"({"product_id":"a","title":"first","description":"d"})" "\n"
                                "not json\n"
                                R"({"product_id":"b","title":"","description":"d"})" "\n"
                                R"({"product_id":"c","description":"d"})" "\n"
                                R"({"product_id":"d","title":"last","description":"d","extra":1})" "\n");
    const auto result = load_catalog(path);
    REQUIRE(result.products.size() == 2);
    CHECK(result.products[0].product_id == "a");
    CHECK(result.products[1].product_id == "d");
    CHECK(result.malformed_lines == 3);
    REQUIRE(result.warnings.size() == 3);
    CHECK(result.warnings[0].starts_with("line 2"));
    CHECK(result.warnings[2].starts_with("line 4"));
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_catalog(dir / "nope.jsonl"), MissingFileError); }
}

TEST_CASE("tokenize") {
  using V = std::vector<std::string>;
  CHECK(tokenize("60 Gal. Electric Air Compressor") == V{"60", "gal", "electric", "air", "compressor"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("135 psi maximum pressure") == V{"135", "psi", "maximum", "pressure"});
  CHECK(tokenize("11.5/10.2 SCFM") == V{"11", "5", "10", "2", "scfm"});
  CHECK(tokenize("  --!! ").empty());
}

TEST_CASE("build_vocabulary") {
  const std::vector<Product> products{{"1", "Air compressor", "compressor pump"},
                                      {"2", "Compressor tank", "air hose once"}};
  SUBCASE("count threshold and ordering") {
    const auto v = build_vocabulary(products, 2);
    // compressor x3, air x2; "once" appears once.
    REQUIRE(v.tokens() == std::vector<std::string>{"compressor", "air"});
    CHECK(v.index_of("compressor") == 2);
    CHECK(v.index_of("air") == 3);
    CHECK(v.index_of("once") == Vocabulary::kOov);
    CHECK(v.size() == 4);
  }
  SUBCASE("ties are lexicographic") {
    const auto v = build_vocabulary(products, 1);
    CHECK(v.tokens() == std::vector<std::string>{"compressor", "air", "hose", "once", "pump", "tank"});
  }
  SUBCASE("empty corpus") { CHECK(build_vocabulary({}, 2).size() == 2); }
  SUBCASE("bad min_count") { CHECK_THROWS_AS(build_vocabulary(products, 0), UsageError); }
}

TEST_CASE("vocabulary size is non-increasing in min_count") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> word(0, 40), len(1, 12);
  std::vector<Product> products;
  for (int i = 0; i < 60; ++i) {
    std::string title, desc;
    for (int k = len(rng); k > 0; --k) title += "w" + std::to_string(word(rng)) + " ";
    for (int k = len(rng); k > 0; --k) desc += "w" + std::to_string(word(rng) / 2) + " ";
    products.push_back({std::to_string(i), title, desc});
  }
  std::size_t previous = SIZE_MAX;
  for (int mc = 1; mc <= 30; ++mc) {
    const auto v = build_vocabulary(products, mc);
    CHECK(v.size() <= previous);
    previous = v.size();
  }
}

TEST_CASE("encode_product_text") {
  const auto vocab = Vocabulary::from_tokens({"x", "y", "z", "60", "x2", "gal"}, 1);
  REQUIRE(vocab.index_of("60") == 5);
  REQUIRE(vocab.index_of("gal") == 7);
  SUBCASE("padding") {
    const auto e = encode_product_text({"p", "60 gal", "x"}, vocab, {4, 3});
    CHECK(e.title_seq == std::vector<std::int32_t>{5, 7, 0, 0});
    CHECK(e.title_len == 2);
    CHECK(e.desc_seq == std::vector<std::int32_t>{2, 0, 0});
    CHECK(e.desc_len == 1);
  }
  SUBCASE("unknown token is OOV") {
    const auto e = encode_product_text({"p", "zzz", "x"}, vocab, {4, 3});
    CHECK(e.title_seq[0] == Vocabulary::kOov);
  }
  SUBCASE("truncation keeps the first tokens") {
    const auto e = encode_product_text({"p", "x y z 60 gal x y z 60 gal", "x"}, vocab, {4, 3});
    CHECK(e.title_seq == std::vector<std::int32_t>{2, 3, 4, 5});
    CHECK(e.title_len == 4);
  }
  SUBCASE("tokenless title is rejected") {
    CHECK_THROWS_AS(encode_product_text({"p", "!!!", "x"}, vocab, {4, 3}), DataError);
  }
  SUBCASE("empty description becomes a single OOV token") {
    const auto e = encode_product_text({"p", "x", ""}, vocab, {4, 3});
    CHECK(e.desc_len == 1);
    CHECK(e.desc_seq == std::vector<std::int32_t>{Vocabulary::kOov, 0, 0});
  }
}

TEST_CASE("encoding invariants on a random corpus") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> word(0, 30), len(1, 25);
  std::vector<Product> products;
  for (int i = 0; i < 100; ++i) {
    std::string title, desc;
    for (int k = len(rng); k > 0; --k) title += "t" + std::to_string(word(rng)) + ". ";
    for (int k = len(rng); k > 0; --k) desc += "d" + std::to_string(word(rng)) + ", ";
    products.push_back({std::to_string(i), title, desc});
  }
  const auto vocab = build_vocabulary(products, 2);
  for (const auto& p : products) {
    const auto e = encode_product_text(p, vocab, {8, 16});
    CHECK(e == encode_product_text(p, vocab, {8, 16}));
    for (const auto* seq : {&e.title_seq, &e.desc_seq}) {
      bool seen_pad = false;
      for (const auto idx : *seq) {
        CHECK(idx >= 0);
        CHECK(static_cast<std::size_t>(idx) < vocab.size());
        if (idx == Vocabulary::kPad) seen_pad = true;
        else CHECK_FALSE(seen_pad);
      }
    }
    CHECK(e.title_len <= 8);
    CHECK(e.desc_len <= 16);
  }
}

TEST_CASE("vocabulary save/load keeps indices and fingerprint") {
  TempDir dir;
  const auto v = Vocabulary::from_tokens({"b", "a", "c"}, 3);
  v.save(dir / "vocab.txt");
  const auto w = Vocabulary::load(dir / "vocab.txt");
  CHECK(w.tokens() == v.tokens());
  CHECK(w.min_count() == 3);
  CHECK(w.fingerprint() == v.fingerprint());
  CHECK(Vocabulary::from_tokens({"a", "b", "c"}, 3).fingerprint() != v.fingerprint());
}
