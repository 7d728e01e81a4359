#include "altrec/embedding_store.hpp"

#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "altrec/error.hpp"
#include "altrec/fingerprint.hpp"
#include "altrec/io.hpp"

namespace altrec {

Encoder export_encoder(const SiameseModel& model) { return Encoder(model); }

const std::vector<double>& EmbeddingStore::at(const std::string& id) const {
  auto it = entries.find(id);
  if (it == entries.end()) throw DataError("no embedding for product " + id);
  return it->second;
}

EmbeddingStore generate_embeddings(const Encoder& encoder, const std::vector<EncodedProduct>& products,
                                   const GenerateOptions& options) {
  if (products.empty()) throw UsageError("generate_embeddings: no products");
  std::unordered_set<std::string> ids;
  for (const auto& p : products) {
    if (!ids.insert(p.product_id).second) throw DuplicateIdError(p.product_id);
  }

  const std::size_t n = products.size();
  std::vector<std::vector<double>> vectors(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, options.threads), n));
  std::size_t reported = 0;
  auto shard = [&](unsigned w) {
    for (std::size_t i = n * w / workers; i < n * (w + 1) / workers; ++i) {
      vectors[i] = encoder(products[i]);
      if (w == 0 && options.on_progress && options.progress_every > 0 &&
          (i + 1) % options.progress_every == 0) {
        reported = (i + 1) * workers;
        options.on_progress(reported, n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(shard, w);
    shard(0);
  }

  EmbeddingStore store;
  store.dim = encoder.output_dim();
  store.model_fingerprint = options.model_fingerprint;
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (const double v : vectors[i]) {
      if (!std::isfinite(v)) throw NumericalError("non-finite embedding for product " + products[i].product_id);
      norm2 += v * v;
    }
    if (norm2 == 0.0) throw ZeroNormError("zero-norm embedding for product " + products[i].product_id);
    store.entries.emplace(products[i].product_id, std::move(vectors[i]));
  }
  if (options.on_progress && reported != n) options.on_progress(n, n);
  return store;
}

namespace {
constexpr char kStoreMagic[8] = {'A', 'L', 'T', 'R', 'E', 'C', 'E', 'M'};
constexpr std::uint32_t kStoreVersion = 1;
}  // namespace

void write_store(std::ostream& out, const EmbeddingStore& store) {
  out.write(kStoreMagic, sizeof(kStoreMagic));
  io::write_pod(out, kStoreVersion);
  io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim));
  io::write_pod<std::uint64_t>(out, store.entries.size());
  io::write_string(out, store.model_fingerprint);
  for (const auto& [id, vec] : store.entries) {
    if (vec.size() != store.dim) throw DataError("embedding for " + id + " has wrong dimension");
    io::write_string(out, id);
    io::write_doubles(out, vec);
  }
}

void save_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  auto out = io::open_output(path, true);
  write_store(out, store);
  if (!out) throw DataError("failed writing embedding store " + path.string());
}

std::string store_fingerprint(const EmbeddingStore& store) {
  std::ostringstream out(std::ios::binary);
  write_store(out, store);
  return sha256_hex(out.str());
}

EmbeddingStore load_store(const std::filesystem::path& path,
                          const std::optional<std::string>& expected_fingerprint) {
  auto in = io::open_input(path, true);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kStoreMagic))) {
    throw DataError(path.string() + ": not an embedding store");
  }
  if (io::read_pod<std::uint32_t>(in) != kStoreVersion) {
    throw DataError(path.string() + ": unsupported embedding store version");
  }
  EmbeddingStore store;
  store.dim = io::read_pod<std::uint32_t>(in);
  const auto count = io::read_pod<std::uint64_t>(in);
  store.model_fingerprint = io::read_string(in);
  if (expected_fingerprint && *expected_fingerprint != store.model_fingerprint) {
    throw StaleArtifactError(path.string() + ": built from model " + store.model_fingerprint +
                             ", expected " + *expected_fingerprint);
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    auto id = io::read_string(in);
    std::vector<double> vec(store.dim);
    io::read_doubles(in, vec);
    if (!store.entries.emplace(std::move(id), std::move(vec)).second) {
      throw DataError(path.string() + ": duplicate id in store");
    }
  }
  return store;
}

void export_store_text(const std::filesystem::path& path, const EmbeddingStore& store) {
  auto out = io::open_output(path);
  for (const auto& [id, vec] : store.entries) {
    out << id;
    for (const double v : vec) out << ',' << io::format_double(v);
    out << '\n';
  }
}

}  // namespace altrec
