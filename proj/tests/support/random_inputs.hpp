#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "altrec/catalog.hpp"
#include "altrec/neural.hpp"

namespace altrec::testing {

// A valid EncodedProduct with random non-PAD tokens and random true lengths.
inline EncodedProduct random_encoded(std::mt19937_64& rng, std::size_t vocab_size, std::size_t title_cap,
                                     std::size_t desc_cap, const std::string& id) {
  std::uniform_int_distribution<std::int32_t> token(1, static_cast<std::int32_t>(vocab_size) - 1);
  std::uniform_int_distribution<std::size_t> tlen(1, title_cap), dlen(1, desc_cap);
  EncodedProduct p;
  p.product_id = id;
  p.title_len = tlen(rng);
  p.desc_len = dlen(rng);
  p.title_seq.assign(title_cap, 0);
  p.desc_seq.assign(desc_cap, 0);
  for (std::size_t i = 0; i < p.title_len; ++i) p.title_seq[i] = token(rng);
  for (std::size_t i = 0; i < p.desc_len; ++i) p.desc_seq[i] = token(rng);
  return p;
}

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n2 = 0.0;
  for (auto& x : v) {
    x = g(rng);
    n2 += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n2);
  return v;
}

}  // namespace altrec::testing
