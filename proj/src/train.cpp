#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/neural.hpp"

namespace altrec {

RmsPropState RmsPropState::for_model(const ModelParameters& params, double lr, double rho,
                                     double eps) {
  return RmsPropState{params.zeros_like(), lr, rho, eps};
}

void rmsprop_step(ModelParameters& params, const Gradients& grads, RmsPropState& state) {
  std::vector<const Tensor*> g;
  grads.for_each([&](std::string_view, const Tensor& t) { g.push_back(&t); });
  std::vector<Tensor*> ms;
  state.mean_square.for_each([&](std::string_view, Tensor& t) { ms.push_back(&t); });
  std::size_t k = 0;
  const double rho = state.decay_rho;
  params.for_each([&](std::string_view name, Tensor& theta) {
    const auto& gv = g[k]->values;
    auto& mv = ms[k]->values;
    ++k;
    if (gv.size() != theta.values.size() || mv.size() != theta.values.size()) {
      throw UsageError("rmsprop_step: shape mismatch for " + std::string(name));
    }
    for (std::size_t i = 0; i < theta.values.size(); ++i) {
      mv[i] = rho * mv[i] + (1.0 - rho) * gv[i] * gv[i];
      theta.values[i] -= state.learning_rate * gv[i] / (std::sqrt(mv[i]) + state.epsilon);
    }
  });
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw UsageError("patience must be >= 1");
}

bool EarlyStopping::update(double val_loss) {
  ++epoch_;
  improved_last_ = best_epoch_ == 0 || val_loss < best_loss_;
  if (improved_last_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return false;
  }
  return ++since_best_ >= patience_;
}

namespace {

std::vector<PairExample> resolve(const std::vector<TrainingTriple>& triples, const CatalogIndex& catalog) {
  std::vector<PairExample> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    const auto a = catalog.find(t.anchor_id);
    const auto b = catalog.find(t.other_id);
    if (a == catalog.end()) throw DataError("triple references unknown product " + t.anchor_id);
    if (b == catalog.end()) throw DataError("triple references unknown product " + t.other_id);
    out.push_back({&a->second, &b->second, t.label});
  }
  return out;
}

double mean_loss(const std::vector<PairExample>& examples, const SiameseModel& model, LossKind kind) {
  // Encode each product once; validation sets repeat anchors heavily.
  std::unordered_map<const EncodedProduct*, std::vector<double>> cache;
  auto vec = [&](const EncodedProduct* p) -> const std::vector<double>& {
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, encode_product(*p, model)).first;
    return it->second;
  };
  double total = 0.0;
  for (const auto& ex : examples) {
    total += instance_loss(cosine_energy(vec(ex.anchor), vec(ex.other)), ex.label, kind, model.params);
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace

double mean_loss(const std::vector<TrainingTriple>& triples, const CatalogIndex& catalog,
                 const SiameseModel& model, LossKind kind) {
  if (triples.empty()) throw UsageError("mean_loss: no triples");
  return mean_loss(resolve(triples, catalog), model, kind);
}

TrainResult train(SiameseModel model, const std::vector<TrainingTriple>& train_triples,
                  const std::vector<TrainingTriple>& val_triples, const CatalogIndex& catalog,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train_triples.empty() || val_triples.empty()) {
    throw UsageError("train: training and validation sets must be non-empty");
  }
  if (config.batch_size < 1) throw UsageError("train: batch_size must be >= 1");
  if (config.max_epochs < 1) throw UsageError("train: max_epochs must be >= 1");
  const auto train_set = resolve(train_triples, catalog);
  const auto val_set = resolve(val_triples, catalog);

  TrainResult result;
  result.initial_val_loss = mean_loss(val_set, model, config.loss_kind);
  result.model = model;
  EarlyStopping stopper(config.patience);
  auto state = RmsPropState::for_model(model.params, config.learning_rate, config.decay_rho, config.epsilon);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<PairExample> batch;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      auto step = compute_gradients(batch, model, config.loss_kind, config.threads);
      epoch_loss += step.loss;
      rmsprop_step(model.params, step.grads, state);
      model.params.for_each([&](std::string_view name, const Tensor& t) {
        if (!t.all_finite()) {
          throw NumericalError("non-finite parameter " + std::string(name) + " in epoch " +
                               std::to_string(epoch));
        }
      });
    }
    EpochRecord rec{epoch, epoch_loss / static_cast<double>(train_set.size()),
                    mean_loss(val_set, model, config.loss_kind)};
    if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.train_loss)) {
      throw NumericalError("non-finite loss in epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    const bool stop = stopper.update(rec.val_loss);
    if (stopper.improved_last()) result.model = model;
    if (stop) break;
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

}  // namespace altrec
