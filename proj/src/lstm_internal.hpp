#pragma once

// Forward traces and backpropagation-through-time for the LSTM encoders.

#include <cstdint>
#include <span>
#include <vector>

#include "altrec/neural.hpp"

namespace altrec::detail {

// Everything one direction's forward pass keeps for the backward pass. Step t
// stores post-activation gates and the states it produced.
struct LstmTrace {
  std::vector<std::int32_t> tokens;  // in processing order
  std::vector<double> gates;         // steps x 4h: i, f, g, o
  std::vector<double> cells;         // steps x h
  std::vector<double> hiddens;       // steps x h

  std::span<const double> final_hidden(std::size_t h) const {
    return {hiddens.data() + hiddens.size() - h, h};
  }
};

LstmTrace lstm_forward(std::span<const std::int32_t> tokens, const Tensor& embedding,
                       const LstmParams& params);

/// Accumulates parameter and embedding gradients given dL/dh at the final step.
void lstm_backward(const LstmTrace& trace, std::span<const double> d_final_hidden,
                   const Tensor& embedding, const LstmParams& params, Tensor& d_embedding,
                   LstmParams& d_params);

struct ProductTrace {
  LstmTrace title_forward;
  LstmTrace title_backward;
  LstmTrace desc_forward;
  LstmTrace desc_backward;
  std::vector<double> output;  // 4h
};

ProductTrace trace_product(const EncodedProduct& p, const SiameseModel& model);

/// Backpropagates dL/d(output) through the four encoders into `grads`.
void backward_product(const ProductTrace& trace, std::span<const double> d_output,
                      const SiameseModel& model, Gradients& grads);

}  // namespace altrec::detail
