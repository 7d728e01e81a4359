#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "altrec/error.hpp"
#include "altrec/neural.hpp"
#include "lstm_internal.hpp"

namespace altrec {

double cosine_energy(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw UsageError("cosine_energy: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ZeroNormError("cosine_energy: zero-norm vector");
  // uu*vv keeps the expression symmetric in (u, v) bit for bit.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "contrastive") return LossKind::contrastive;
  if (name == "binary_cross_entropy" || name == "bce") return LossKind::binary_cross_entropy;
  throw UsageError("unknown loss kind: " + std::string(name));
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::contrastive ? "contrastive" : "binary_cross_entropy";
}

double contrastive_loss(double energy, int label) {
  if (label == 1) return std::abs(1.0 - energy);
  return energy > 0.0 ? std::abs(energy) : 0.0;
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// dLoss/dEnergy, with 0 at the kinks |1 - e| (e = 1) and max(e, 0) (e = 0).
double contrastive_slope(double energy, int label) {
  if (label == 1) return energy < 1.0 ? -1.0 : (energy > 1.0 ? 1.0 : 0.0);
  return energy > 0.0 ? 1.0 : 0.0;
}

struct InstanceSlope {
  double loss;
  double d_energy;
  double d_scale;
  double d_offset;
};

InstanceSlope instance_slope(double energy, int label, LossKind kind, const ModelParameters& p) {
  if (kind == LossKind::contrastive) {
    return {contrastive_loss(energy, label), contrastive_slope(energy, label), 0.0, 0.0};
  }
  const double scale = p.bce_affine.values[0];
  const double z = scale * energy + p.bce_affine.values[1];
  const double r = sigmoid(z) - static_cast<double>(label);
  return {softplus(z) - static_cast<double>(label) * z, scale * r, energy * r, r};
}

// dE/du for E = <u,v>/(|u||v|), written into `out` scaled by `scale`.
void add_cosine_grad(std::span<const double> u, std::span<const double> v, double energy,
                     double scale, std::span<double> out) {
  double uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(uu * vv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] += scale * (v[i] * inv - energy * u[i] / uu);
  }
}

}  // namespace

double instance_loss(double energy, int label, LossKind kind, const ModelParameters& params) {
  if (label != 0 && label != 1) throw UsageError("label must be 0 or 1");
  return instance_slope(energy, label, kind, params).loss;
}

double batch_loss(std::span<const PairExample> batch, const SiameseModel& model, LossKind kind) {
  if (batch.empty()) throw UsageError("batch_loss: empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto a = encode_product(*ex.anchor, model);
    const auto b = encode_product(*ex.other, model);
    total += instance_loss(cosine_energy(a, b), ex.label, kind, model.params);
  }
  return total;
}

LossAndGradients compute_gradients(std::span<const PairExample> batch, const SiameseModel& model,
                                   LossKind kind, unsigned threads) {
  if (batch.empty()) throw UsageError("compute_gradients: empty batch");
  threads = std::max(1u, threads);

  // Each distinct product is encoded once; its output gradient is summed over
  // every pair it takes part in before a single backward pass.
  std::vector<const EncodedProduct*> products;
  std::unordered_map<const EncodedProduct*, std::size_t> slot;
  std::vector<std::pair<std::size_t, std::size_t>> pair_slots;
  for (const auto& ex : batch) {
    std::size_t s[2];
    const EncodedProduct* sides[2] = {ex.anchor, ex.other};
    for (int k = 0; k < 2; ++k) {
      auto [it, inserted] = slot.emplace(sides[k], products.size());
      if (inserted) products.push_back(sides[k]);
      s[k] = it->second;
    }
    pair_slots.emplace_back(s[0], s[1]);
  }

  const std::size_t n = products.size();
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  auto chunk_bounds = [&](unsigned w) {
    return std::pair<std::size_t, std::size_t>{n * w / workers, n * (w + 1) / workers};
  };
  auto run_parallel = [&](auto&& body) {
    if (workers == 1) {
      body(0u);
      return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back([&body, w] { body(w); });
    body(0u);
  };

  std::vector<detail::ProductTrace> traces(n);
  run_parallel([&](unsigned w) {
    const auto [lo, hi] = chunk_bounds(w);
    for (std::size_t i = lo; i < hi; ++i) traces[i] = detail::trace_product(*products[i], model);
  });

  LossAndGradients result;
  result.grads = model.params.zeros_like();
  const std::size_t dim = model.output_dim();
  std::vector<std::vector<double>> d_out(n, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto [sa, sb] = pair_slots[i];
    const auto& u = traces[sa].output;
    const auto& v = traces[sb].output;
    const double energy = cosine_energy(u, v);
    const auto slope = instance_slope(energy, batch[i].label, kind, model.params);
    result.loss += slope.loss;
    result.grads.bce_affine.values[0] += slope.d_scale;
    result.grads.bce_affine.values[1] += slope.d_offset;
    if (slope.d_energy == 0.0) continue;
    add_cosine_grad(u, v, energy, slope.d_energy, d_out[sa]);
    add_cosine_grad(v, u, energy, slope.d_energy, d_out[sb]);
  }

  std::vector<Gradients> partial(workers > 1 ? workers - 1 : 0, Gradients{});
  run_parallel([&](unsigned w) {
    Gradients* target = &result.grads;
    if (w > 0) {
      partial[w - 1] = model.params.zeros_like();
      target = &partial[w - 1];
    }
    const auto [lo, hi] = chunk_bounds(w);
    for (std::size_t i = lo; i < hi; ++i) detail::backward_product(traces[i], d_out[i], model, *target);
  });
  for (auto& g : partial) {
    std::vector<Tensor*> dst;
    result.grads.for_each([&](std::string_view, Tensor& t) { dst.push_back(&t); });
    std::size_t k = 0;
    g.for_each([&](std::string_view, const Tensor& t) {
      auto& d = dst[k++]->values;
      for (std::size_t j = 0; j < d.size(); ++j) d[j] += t.values[j];
    });
  }

  for (auto& v : result.grads.embedding.row(0)) v = 0.0;
  result.grads.for_each([](std::string_view name, const Tensor& t) {
    if (!t.all_finite()) throw NumericalError("non-finite gradient in " + std::string(name));
  });
  if (!std::isfinite(result.loss)) throw NumericalError("non-finite batch loss");
  return result;
}

}  // namespace altrec
