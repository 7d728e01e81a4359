#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "altrec/neural.hpp"
#include "support/random_inputs.hpp"

namespace altrec::testing {

struct GradientCase {
  SiameseModel model;
  std::vector<EncodedProduct> products;
  std::vector<PairExample> batch;
};

// Small random model and batch whose energies stay clear of the loss kinks
// (E = 1 for positives, E = 0 for negatives) so central differences are valid.
inline GradientCase make_gradient_case(std::uint64_t seed, LossKind kind, std::size_t vocab = 12,
                                       std::size_t embed = 3, std::size_t hidden = 3, std::size_t pairs = 4) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 rng(seed * 1000 + attempt);
    GradientCase c;
    c.model = init_model(vocab, embed, hidden, seed * 31 + attempt);
    if (kind == LossKind::binary_cross_entropy) c.model.params.bce_affine.values = {2.5, -0.3};
    for (std::size_t i = 0; i <= pairs; ++i) c.products.push_back(random_encoded(rng, vocab, 4, 5, std::to_string(i)));
    for (std::size_t i = 0; i < pairs; ++i) c.batch.push_back({&c.products[i], &c.products[i + 1], static_cast<int>(i % 2)});
    bool clear = true;
    for (const auto& ex : c.batch) {
      const double e = cosine_energy(encode_product(*ex.anchor, c.model), encode_product(*ex.other, c.model));
      if (std::abs(e) < 0.02 || std::abs(1.0 - e) < 0.02) clear = false;
    }
    if (clear) return c;
  }
}

struct TensorError {
  std::string name;
  double relative = 0.0;
};

// Central differences on every parameter; relative error per tensor is
// |g - g_fd| / (|g| + |g_fd|) in the Euclidean norm.
inline std::vector<TensorError> check_gradients(const GradientCase& c, LossKind kind, double h = 1e-5) {
  const auto analytic = compute_gradients(c.batch, c.model, kind).grads;
  auto model = c.model;
  std::vector<TensorError> out;
  std::vector<const Tensor*> analytic_tensors;
  analytic.for_each([&](std::string_view, const Tensor& t) { analytic_tensors.push_back(&t); });
  std::size_t index = 0;
  model.params.for_each([&](std::string_view name, Tensor& t) {
    const Tensor& g = *analytic_tensors[index++];
    double diff = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double saved = t.values[k];
      t.values[k] = saved + h;
      const double up = batch_loss(c.batch, model, kind);
      t.values[k] = saved - h;
      const double down = batch_loss(c.batch, model, kind);
      t.values[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      diff += (g.values[k] - fd) * (g.values[k] - fd);
      na += g.values[k] * g.values[k];
      nf += fd * fd;
    }
    const double denom = std::sqrt(na) + std::sqrt(nf);
    out.push_back({std::string(name), denom < 1e-12 ? 0.0 : std::sqrt(diff) / denom});
  });
  return out;
}

}  // namespace altrec::testing
