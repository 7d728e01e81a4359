#include <doctest.h>

#include <algorithm>

#include "altrec/error.hpp"
#include "altrec/neural.hpp"
#include "altrec/synth.hpp"

using namespace altrec;

namespace {

struct SmallCorpus {
  CatalogIndex catalog;
  std::size_t vocab_size = 0;
  TripleSplit split;
};

SmallCorpus small_corpus() {
  SynthOptions so;
  so.families = 2;
  so.products_per_family = 24;
  so.sessions = 0;
  so.uncompared_fraction = 0.0;
  const auto data = generate_synth(so);
  std::vector<ComparePair> pairs;
  for (const auto& [a, b] : data.pair_lines) pairs.push_back(ComparePair::make(a, b));
  const auto triples = sample_triples(connected_components(dedupe_pairs(pairs)), {});
  SmallCorpus c;
  const auto vocab = build_vocabulary(data.products, 2);
  c.vocab_size = vocab.size();
  for (auto& e : encode_catalog(data.products, vocab, {8, 24})) c.catalog.emplace(e.product_id, e);
  c.split = split_train_validation(triples, 0.1, 7);
  return c;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.max_epochs = 6;
  cfg.patience = 3;
  cfg.learning_rate = 5e-3;
  return cfg;
}

}  // namespace

TEST_CASE("training reduces validation loss and keeps the best snapshot") {
  const auto c = small_corpus();
  const auto model = init_model(c.vocab_size, 8, 8, 7);
  std::vector<EpochRecord> seen;
  const auto result = train(model, c.split.train, c.split.validation, c.catalog, small_config(),
                            [&](const EpochRecord& r) { seen.push_back(r); });
  REQUIRE_FALSE(result.history.empty());
  CHECK(seen.size() == result.history.size());
  CHECK(result.initial_val_loss == doctest::Approx(mean_loss(c.split.validation, c.catalog, model, LossKind::contrastive)));

  const auto best = std::min_element(result.history.begin(), result.history.end(),
                                     [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; });
  CHECK(result.best_epoch == best->epoch);
  CHECK(best->val_loss < result.initial_val_loss);
  CHECK(mean_loss(c.split.validation, c.catalog, result.model, LossKind::contrastive) ==
        doctest::Approx(best->val_loss).epsilon(1e-12));
  for (std::size_t i = 0; i < result.history.size(); ++i) CHECK(result.history[i].epoch == static_cast<int>(i) + 1);
}

TEST_CASE("training is deterministic for a seed") {
  const auto c = small_corpus();
  auto cfg = small_config();
  cfg.max_epochs = 2;
  const auto model = init_model(c.vocab_size, 6, 5, 3);
  const auto a = train(model, c.split.train, c.split.validation, c.catalog, cfg);
  const auto b = train(model, c.split.train, c.split.validation, c.catalog, cfg);
  CHECK(a.model == b.model);
  CHECK(a.history.back().val_loss == b.history.back().val_loss);
  cfg.seed = 8;
  const auto d = train(model, c.split.train, c.split.validation, c.catalog, cfg);
  CHECK_FALSE(a.model == d.model);
}

TEST_CASE("training with the cross-entropy loss") {
  const auto c = small_corpus();
  auto cfg = small_config();
  cfg.loss_kind = LossKind::binary_cross_entropy;
  cfg.max_epochs = 3;
  const auto result = train(init_model(c.vocab_size, 6, 5, 3), c.split.train, c.split.validation, c.catalog, cfg);
  CHECK(result.history[static_cast<std::size_t>(result.best_epoch) - 1].val_loss < result.initial_val_loss);
}

TEST_CASE("training rejects unresolvable ids and empty sets") {
  const auto c = small_corpus();
  const auto model = init_model(c.vocab_size, 4, 4, 1);
  auto bad = c.split.validation;
  bad.push_back({"missing", c.catalog.begin()->first, 1});
  CHECK_THROWS_AS(train(model, c.split.train, bad, c.catalog, small_config()), DataError);
  CHECK_THROWS(train(model, {}, c.split.validation, c.catalog, small_config()));
}
