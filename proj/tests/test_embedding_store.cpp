#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "altrec/embedding_store.hpp"
#include "altrec/error.hpp"
#include "altrec/fingerprint.hpp"
#include "altrec/synth.hpp"
#include "support/random_inputs.hpp"
#include "support/temp_dir.hpp"

using namespace altrec;
using namespace altrec::testing;

namespace {

std::vector<EncodedProduct> random_products(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EncodedProduct> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "p%05zu", i);
    out.push_back(random_encoded(rng, vocab, 6, 10, id));
  }
  return out;
}

}  // namespace

TEST_CASE("exported encoder equals one Siamese branch") {
  const auto model = init_model(30, 6, 5, 2);
  const auto encoder = export_encoder(model);
  CHECK(encoder.output_dim() == 20);
  for (const auto& p : random_products(20, 30, 1)) CHECK(encoder(p) == encode_product(p, model));
}

TEST_CASE("generate_embeddings") {
  const auto model = init_model(30, 6, 5, 2);
  const auto products = random_products(50, 30, 3);
  GenerateOptions opts;
  opts.model_fingerprint = "fp";
  std::size_t last_done = 0;
  opts.progress_every = 10;
  opts.on_progress = [&](std::size_t done, std::size_t total) {
    CHECK(total == 50);
    CHECK(done > last_done);
    last_done = done;
  };
  const auto store = generate_embeddings(export_encoder(model), products, opts);
  CHECK(last_done == 50);
  CHECK(store.size() == 50);
  CHECK(store.dim == 20);
  CHECK(store.model_fingerprint == "fp");
  for (const auto& p : products) CHECK(store.at(p.product_id) == encode_product(p, model));
  CHECK_THROWS_AS(store.at("nope"), DataError);

  SUBCASE("deterministic and thread-count independent") {
    GenerateOptions threaded;
    threaded.threads = 3;
    threaded.model_fingerprint = "fp";
    CHECK(generate_embeddings(export_encoder(model), products, threaded) == store);
  }
  SUBCASE("duplicate ids are rejected") {
    auto dup = products;
    dup.push_back(products[4]);
    CHECK_THROWS_AS(generate_embeddings(export_encoder(model), dup), DuplicateIdError);
  }
  SUBCASE("empty catalog is rejected") {
    CHECK_THROWS_AS(generate_embeddings(export_encoder(model), {}), UsageError);
  }
}

TEST_CASE("zero embedding names the product") {
  auto model = init_model(10, 3, 2, 1);
  model.params.for_each([](std::string_view, Tensor& t) { t.fill(0.0); });
  const auto products = random_products(2, 10, 1);
  try {
    generate_embeddings(export_encoder(model), products);
    FAIL("expected ZeroNormError");
  } catch (const ZeroNormError& e) {
    CHECK(std::string(e.what()).find("p00000") != std::string::npos);
  }
}

TEST_CASE("store persistence") {
  TempDir dir;
  const auto model = init_model(30, 6, 5, 2);
  GenerateOptions opts;
  opts.model_fingerprint = "abc";
  const auto store = generate_embeddings(export_encoder(model), random_products(15, 30, 4), opts);
  save_store(dir / "e.bin", store);
  const auto fp = store_fingerprint(store);
  CHECK(fp == sha256_file(dir / "e.bin"));
  const auto loaded = load_store(dir / "e.bin", std::string("abc"));
  CHECK(loaded == store);
  save_store(dir / "f.bin", loaded);
  CHECK(read_file(dir / "e.bin") == read_file(dir / "f.bin"));
  CHECK_THROWS_AS(load_store(dir / "e.bin", std::string("other-model")), StaleArtifactError);
  CHECK_THROWS_AS(load_store(dir / "none.bin"), MissingFileError);
  const auto bytes = read_file(dir / "e.bin");
  CHECK_THROWS_AS(load_store(dir.write("cut.bin", bytes.substr(0, bytes.size() - 5))), DataError);

  export_store_text(dir / "e.txt", store);
  const auto text = read_file(dir / "e.txt");
  CHECK(std::count(text.begin(), text.end(), '\n') == 15);
  CHECK(text.starts_with("p00000,"));
}

TEST_CASE("10k products embed within a minute") {
  SynthOptions so;
  so.families = 40;
  so.sessions = 0;
  const auto data = generate_synth(so);
  REQUIRE(data.products.size() == 10000);
  const auto vocab = build_vocabulary(data.products, 2);
  const auto products = encode_catalog(data.products, vocab);
  const auto model = init_model(vocab.size(), 32, 32, 7);
  const auto start = std::chrono::steady_clock::now();
  const auto store = generate_embeddings(export_encoder(model), products);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("embedded 10000 products in " << seconds << " s");
  CHECK(store.size() == 10000);
  CHECK(seconds < 60.0);
}
