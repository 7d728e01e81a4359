#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace altrec {

struct Product {
  std::string product_id;
  std::string title;
  std::string description;

  bool operator==(const Product&) const = default;
};

struct CatalogLoadResult {
  std::vector<Product> products;
  std::size_t malformed_lines = 0;
  // "line N: reason" for every skipped line.
  std::vector<std::string> warnings;
};

/// Reads a JSON-lines catalog: one object per line with string fields
/// `product_id`, `title` and `description`. Other fields are ignored.
/// Malformed lines are skipped and reported; a repeated product_id aborts
/// with DuplicateIdError.
CatalogLoadResult load_catalog(const std::filesystem::path& path);

/// Lowercases and splits on maximal runs of non-alphanumeric (ASCII) characters.
std::vector<std::string> tokenize(std::string_view text);

// Index 0 is PAD, index 1 is OOV; learned tokens start at 2.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kOov = 1;

  Vocabulary() = default;

  /// Builds from an explicit token list; tokens[i] gets index i + 2.
  static Vocabulary from_tokens(std::vector<std::string> tokens, int min_count);

  std::int32_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size() + 2; }
  int min_count() const noexcept { return min_count_; }
  /// Learned tokens in index order (index = position + 2).
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Stable content hash (min_count and the ordered token list).
  std::string fingerprint() const;

  /// Text format: first line `min_count=<n>`, then one token per line in
  /// index order starting at index 2.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  int min_count_ = 1;
};

/// Counts tokens over all titles and descriptions and keeps those seen at
/// least `min_count` times, ordered by count descending then lexicographically.
Vocabulary build_vocabulary(const std::vector<Product>& products, int min_count);

struct EncodedProduct {
  std::string product_id;
  std::vector<std::int32_t> title_seq;
  std::size_t title_len = 0;
  std::vector<std::int32_t> desc_seq;
  std::size_t desc_len = 0;

  bool operator==(const EncodedProduct&) const = default;
};

struct SequenceLengths {
  std::size_t title = 16;
  std::size_t description = 96;
};

/// Tokenizes, maps through the vocabulary (unknown tokens become OOV),
/// truncates and right-pads each field. Throws DataError if the title has no
/// tokens.
EncodedProduct encode_product_text(const Product& product, const Vocabulary& vocab,
                                   SequenceLengths lengths = {});

std::vector<EncodedProduct> encode_catalog(const std::vector<Product>& products,
                                           const Vocabulary& vocab, SequenceLengths lengths = {});

}  // namespace altrec
