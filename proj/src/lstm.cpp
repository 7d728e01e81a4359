#include <algorithm>
#include <cmath>

#include "altrec/error.hpp"
#include "lstm_internal.hpp"

namespace altrec {
namespace detail {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::int32_t> reversed_prefix(std::span<const std::int32_t> tokens, std::size_t len) {
  std::vector<std::int32_t> out(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(len));
  std::reverse(out.begin(), out.end());
  return out;
}

void check_length(std::span<const std::int32_t> tokens, std::size_t len) {
  if (len == 0) throw DataError("bilstm_encode: sequence length must be >= 1");
  if (len > tokens.size()) throw DataError("bilstm_encode: length exceeds sequence");
}

}  // namespace

LstmTrace lstm_forward(std::span<const std::int32_t> tokens, const Tensor& embedding,
                       const LstmParams& params) {
  const std::size_t h = params.hidden_dim();
  const std::size_t e = params.input_dim();
  const std::size_t steps = tokens.size();
  LstmTrace tr;
  tr.tokens.assign(tokens.begin(), tokens.end());
  tr.gates.resize(steps * 4 * h);
  tr.cells.resize(steps * h);
  tr.hiddens.resize(steps * h);

  std::vector<double> z(4 * h);
  const std::vector<double> zeros(h, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto token = static_cast<std::size_t>(tokens[t]);
    if (token >= embedding.rows()) throw DataError("token index out of vocabulary range");
    const double* x = embedding.row(token).data();
    const double* h_prev = t == 0 ? zeros.data() : &tr.hiddens[(t - 1) * h];
    const double* c_prev = t == 0 ? zeros.data() : &tr.cells[(t - 1) * h];
    for (std::size_t r = 0; r < 4 * h; ++r) {
      double acc = params.bias.values[r];
      const double* wi = &params.w_input.values[r * e];
      for (std::size_t k = 0; k < e; ++k) acc += wi[k] * x[k];
      const double* wr = &params.w_recurrent.values[r * h];
      for (std::size_t k = 0; k < h; ++k) acc += wr[k] * h_prev[k];
      z[r] = acc;
    }
    double* g = &tr.gates[t * 4 * h];
    double* c = &tr.cells[t * h];
    double* hid = &tr.hiddens[t * h];
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[h + j]);
      const double cg = std::tanh(z[2 * h + j]);
      const double og = sigmoid(z[3 * h + j]);
      g[j] = ig;
      g[h + j] = fg;
      g[2 * h + j] = cg;
      g[3 * h + j] = og;
      c[j] = fg * c_prev[j] + ig * cg;
      hid[j] = og * std::tanh(c[j]);
    }
  }
  return tr;
}

void lstm_backward(const LstmTrace& tr, std::span<const double> d_final_hidden,
                   const Tensor& embedding, const LstmParams& params, Tensor& d_embedding,
                   LstmParams& d_params) {
  const std::size_t h = params.hidden_dim();
  const std::size_t e = params.input_dim();
  const std::size_t steps = tr.tokens.size();
  std::vector<double> dh(d_final_hidden.begin(), d_final_hidden.end());
  std::vector<double> dc(h, 0.0);
  std::vector<double> dz(4 * h);
  std::vector<double> dh_prev(h);
  const std::vector<double> zeros(h, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const double* g = &tr.gates[t * 4 * h];
    const double* c = &tr.cells[t * h];
    const double* c_prev = t == 0 ? zeros.data() : &tr.cells[(t - 1) * h];
    const double* h_prev = t == 0 ? zeros.data() : &tr.hiddens[(t - 1) * h];
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = g[j], fg = g[h + j], cg = g[2 * h + j], og = g[3 * h + j];
      const double tc = std::tanh(c[j]);
      const double d_o = dh[j] * tc;
      const double dcj = dc[j] + dh[j] * og * (1.0 - tc * tc);
      dz[j] = dcj * cg * ig * (1.0 - ig);
      dz[h + j] = dcj * c_prev[j] * fg * (1.0 - fg);
      dz[2 * h + j] = dcj * ig * (1.0 - cg * cg);
      dz[3 * h + j] = d_o * og * (1.0 - og);
      dc[j] = dcj * fg;
    }

    const auto token = static_cast<std::size_t>(tr.tokens[t]);
    const double* x = embedding.row(token).data();
    double* dx = d_embedding.row(token).data();
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t r = 0; r < 4 * h; ++r) {
      const double dzr = dz[r];
      d_params.bias.values[r] += dzr;
      if (dzr == 0.0) continue;
      double* dwi = &d_params.w_input.values[r * e];
      const double* wi = &params.w_input.values[r * e];
      for (std::size_t k = 0; k < e; ++k) {
        dwi[k] += dzr * x[k];
        dx[k] += dzr * wi[k];
      }
      double* dwr = &d_params.w_recurrent.values[r * h];
      const double* wr = &params.w_recurrent.values[r * h];
      for (std::size_t k = 0; k < h; ++k) {
        dwr[k] += dzr * h_prev[k];
        dh_prev[k] += dzr * wr[k];
      }
    }
    dh.swap(dh_prev);
  }
}

ProductTrace trace_product(const EncodedProduct& p, const SiameseModel& model) {
  const auto& params = model.params;
  const std::size_t h = model.hidden_dim;
  check_length(p.title_seq, p.title_len);
  check_length(p.desc_seq, p.desc_len);
  ProductTrace tr;
  std::span<const std::int32_t> title(p.title_seq.data(), p.title_len);
  std::span<const std::int32_t> desc(p.desc_seq.data(), p.desc_len);
  tr.title_forward = lstm_forward(title, params.embedding, params.title.forward);
  tr.title_backward =
      lstm_forward(reversed_prefix(p.title_seq, p.title_len), params.embedding, params.title.backward);
  tr.desc_forward = lstm_forward(desc, params.embedding, params.description.forward);
  tr.desc_backward =
      lstm_forward(reversed_prefix(p.desc_seq, p.desc_len), params.embedding, params.description.backward);
  tr.output.reserve(4 * h);
  for (const auto* t : {&tr.title_forward, &tr.title_backward, &tr.desc_forward, &tr.desc_backward}) {
    const auto fin = t->final_hidden(h);
    tr.output.insert(tr.output.end(), fin.begin(), fin.end());
  }
  return tr;
}

void backward_product(const ProductTrace& tr, std::span<const double> d_output,
                      const SiameseModel& model, Gradients& grads) {
  const std::size_t h = model.hidden_dim;
  const auto& p = model.params;
  lstm_backward(tr.title_forward, d_output.subspan(0, h), p.embedding, p.title.forward,
                grads.embedding, grads.title.forward);
  lstm_backward(tr.title_backward, d_output.subspan(h, h), p.embedding, p.title.backward,
                grads.embedding, grads.title.backward);
  lstm_backward(tr.desc_forward, d_output.subspan(2 * h, h), p.embedding, p.description.forward,
                grads.embedding, grads.description.forward);
  lstm_backward(tr.desc_backward, d_output.subspan(3 * h, h), p.embedding, p.description.backward,
                grads.embedding, grads.description.backward);
}

}  // namespace detail

std::vector<double> bilstm_encode(std::span<const std::int32_t> tokens, std::size_t len,
                                  const Tensor& embedding, const BiLstmLayer& layer) {
  detail::check_length(tokens, len);
  const std::size_t h = layer.hidden_dim();
  const auto fwd = detail::lstm_forward(tokens.first(len), embedding, layer.forward);
  const auto bwd = detail::lstm_forward(detail::reversed_prefix(tokens, len), embedding, layer.backward);
  std::vector<double> out;
  out.reserve(2 * h);
  const auto a = fwd.final_hidden(h);
  const auto b = bwd.final_hidden(h);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<double> encode_product(const EncodedProduct& p, const SiameseModel& model) {
  auto out = bilstm_encode(p.title_seq, p.title_len, model.params.embedding, model.params.title);
  const auto d = bilstm_encode(p.desc_seq, p.desc_len, model.params.embedding, model.params.description);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

}  // namespace altrec
