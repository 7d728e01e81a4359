#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "altrec/catalog.hpp"
#include "altrec/neural.hpp"

namespace altrec {

/// Single-branch view of a Siamese model: what remains once the second input
/// branch and the cosine head are dropped. Holds a reference, never a copy.
class Encoder {
 public:
  explicit Encoder(const SiameseModel& model) : model_(&model) {}
  std::vector<double> operator()(const EncodedProduct& p) const { return encode_product(p, *model_); }
  std::size_t output_dim() const noexcept { return model_->output_dim(); }

 private:
  const SiameseModel* model_;
};

Encoder export_encoder(const SiameseModel& model);

struct EmbeddingStore {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> entries;  // sorted by product_id
  std::string model_fingerprint;

  std::size_t size() const noexcept { return entries.size(); }
  const std::vector<double>& at(const std::string& id) const;
  bool operator==(const EmbeddingStore&) const = default;
};

struct GenerateOptions {
  unsigned threads = 1;
  std::size_t progress_every = 1000;
  std::string model_fingerprint;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

/// Encodes every product. Throws DuplicateIdError and, for an all-zero or
/// non-finite vector, NumericalError naming the product.
EmbeddingStore generate_embeddings(const Encoder& encoder, const std::vector<EncodedProduct>& products,
                                   const GenerateOptions& options = {});

/// Binary layout (little-endian): magic "ALTRECEM", u32 version, u32 dim,
/// u64 count, length-prefixed fingerprint, then per entry sorted by id:
/// u32 id length, id bytes, dim float64 values.
void save_store(const std::filesystem::path& path, const EmbeddingStore& store);
void write_store(std::ostream& out, const EmbeddingStore& store);

/// SHA-256 of the store's binary serialization.
std::string store_fingerprint(const EmbeddingStore& store);

/// Throws StaleArtifactError when `expected_fingerprint` is given and differs.
EmbeddingStore load_store(const std::filesystem::path& path,
                          const std::optional<std::string>& expected_fingerprint = std::nullopt);

/// One line per entry: id followed by comma-separated values at 17 significant digits.
void export_store_text(const std::filesystem::path& path, const EmbeddingStore& store);

}  // namespace altrec
