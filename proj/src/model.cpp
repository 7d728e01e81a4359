#include <cmath>
#include <random>

#include "altrec/error.hpp"
#include "altrec/io.hpp"
#include "altrec/neural.hpp"

namespace altrec {

bool Tensor::all_finite() const noexcept {
  for (const double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ModelParameters ModelParameters::zeros_like() const {
  ModelParameters out = *this;
  out.for_each([](std::string_view, Tensor& t) { t.fill(0.0); });
  return out;
}

namespace {

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-s, s);
  for (auto& v : t.values) v = dist(rng);
}

LstmParams init_lstm(std::size_t embed_dim, std::size_t hidden_dim, std::mt19937_64& rng) {
  LstmParams p;
  p.w_input = Tensor::zeros({4 * hidden_dim, embed_dim});
  p.w_recurrent = Tensor::zeros({4 * hidden_dim, hidden_dim});
  p.bias = Tensor::zeros({4 * hidden_dim});
  glorot_fill(p.w_input, embed_dim, 4 * hidden_dim, rng);
  glorot_fill(p.w_recurrent, hidden_dim, 4 * hidden_dim, rng);
  for (std::size_t j = 0; j < hidden_dim; ++j) p.bias.values[hidden_dim + j] = 1.0;
  return p;
}

}  // namespace

SiameseModel init_model(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim,
                        std::uint64_t seed) {
  if (vocab_size < 1 || embed_dim < 1 || hidden_dim < 1) {
    throw UsageError("init_model: all dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  SiameseModel m;
  m.vocab_size = vocab_size;
  m.embed_dim = embed_dim;
  m.hidden_dim = hidden_dim;
  auto& p = m.params;
  p.embedding = Tensor::zeros({vocab_size, embed_dim});
  glorot_fill(p.embedding, vocab_size, embed_dim, rng);
  for (auto& v : p.embedding.row(0)) v = 0.0;
  for (auto* layer : {&p.title, &p.description}) {
    layer->forward = init_lstm(embed_dim, hidden_dim, rng);
    layer->backward = init_lstm(embed_dim, hidden_dim, rng);
  }
  p.bce_affine = Tensor{{2}, {1.0, 0.0}};
  return m;
}

namespace {
constexpr char kCheckpointMagic[8] = {'A', 'L', 'T', 'R', 'E', 'C', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SiameseModel& model) {
  auto out = io::open_output(path, true);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  io::write_pod(out, kCheckpointVersion);
  io::write_pod<std::uint64_t>(out, model.vocab_size);
  io::write_pod<std::uint64_t>(out, model.embed_dim);
  io::write_pod<std::uint64_t>(out, model.hidden_dim);
  io::write_string(out, model.vocab_fingerprint);
  std::uint32_t count = 0;
  model.params.for_each([&](std::string_view, const Tensor&) { ++count; });
  io::write_pod(out, count);
  model.params.for_each([&](std::string_view name, const Tensor& t) {
    io::write_string(out, name);
    io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (const auto d : t.shape) io::write_pod<std::uint64_t>(out, d);
    io::write_doubles(out, t.values);
  });
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

SiameseModel load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_input(path, true);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kCheckpointMagic))) {
    throw DataError(path.string() + ": not a model checkpoint");
  }
  if (io::read_pod<std::uint32_t>(in) != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version");
  }
  const auto vocab_size = io::read_pod<std::uint64_t>(in);
  const auto embed_dim = io::read_pod<std::uint64_t>(in);
  const auto hidden_dim = io::read_pod<std::uint64_t>(in);
  // Shapes come from a freshly initialized model; the file must agree with them.
  SiameseModel m = init_model(vocab_size, embed_dim, hidden_dim, 0);
  m.vocab_fingerprint = io::read_string(in);
  std::uint32_t expected = 0;
  m.params.for_each([&](std::string_view, const Tensor&) { ++expected; });
  if (io::read_pod<std::uint32_t>(in) != expected) {
    throw DataError(path.string() + ": unexpected tensor count");
  }
  m.params.for_each([&](std::string_view name, Tensor& t) {
    if (io::read_string(in) != name) throw DataError(path.string() + ": tensor order mismatch");
    const auto rank = io::read_pod<std::uint32_t>(in);
    if (rank != t.shape.size()) throw DataError(path.string() + ": rank mismatch for " + std::string(name));
    for (const auto d : t.shape) {
      if (io::read_pod<std::uint64_t>(in) != d) {
        throw DataError(path.string() + ": shape mismatch for " + std::string(name));
      }
    }
    io::read_doubles(in, t.values);
  });
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after checkpoint");
  }
  return m;
}

}  // namespace altrec
