#include "altrec/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/fingerprint.hpp"
#include "altrec/io.hpp"

namespace altrec {

CatalogLoadResult load_catalog(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  CatalogLoadResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  auto skip = [&](const std::string& reason) {
    ++result.malformed_lines;
    result.warnings.push_back("line " + std::to_string(line_no) + ": " + reason);
    spdlog::warn("{}:{}: skipped: {}", path.string(), line_no, reason);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      skip("not a JSON object");
      continue;
    }
    const auto field = [&](const char* name) -> const nlohmann::json* {
      auto it = record.find(name);
      if (it == record.end() || !it->is_string()) return nullptr;
      return &*it;
    };
    const auto* id = field("product_id");
    const auto* title = field("title");
    const auto* desc = field("description");
    if (!id || !title || !desc) {
      skip("missing or non-string product_id/title/description");
      continue;
    }
    Product p{id->get<std::string>(), title->get<std::string>(), desc->get<std::string>()};
    if (p.product_id.empty()) {
      skip("empty product_id");
      continue;
    }
    if (p.title.empty()) {
      skip("empty title");
      continue;
    }
    if (!seen.insert(p.product_id).second) throw DuplicateIdError(p.product_id);
    result.products.push_back(std::move(p));
  }
  return result;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, int min_count) {
  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_ = std::move(tokens);
  v.index_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<std::int32_t>(i + 2)).second) {
      throw DataError("vocabulary: repeated token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

std::int32_t Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOov : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::string Vocabulary::fingerprint() const {
  std::string blob = "min_count=" + std::to_string(min_count_) + "\n";
  for (const auto& t : tokens_) {
    blob += t;
    blob += '\n';
  }
  return sha256_hex(blob);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  auto out = io::open_output(path);
  out << "min_count=" << min_count_ << '\n';
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("min_count=")) {
    throw DataError(path.string() + ": missing min_count header");
  }
  const int min_count = std::stoi(line.substr(10));
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    if (!line.empty()) tokens.push_back(line);
  }
  return from_tokens(std::move(tokens), min_count);
}

Vocabulary build_vocabulary(const std::vector<Product>& products, int min_count) {
  if (min_count < 1) throw UsageError("build_vocabulary: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& p : products) {
    for (auto& t : tokenize(p.title)) ++counts[std::move(t)];
    for (auto& t : tokenize(p.description)) ++counts[std::move(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, n] : counts) {
    if (n >= static_cast<std::size_t>(min_count)) kept.emplace_back(token, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, n] : kept) tokens.push_back(std::move(token));
  return Vocabulary::from_tokens(std::move(tokens), min_count);
}

namespace {

std::vector<std::int32_t> encode_field(std::string_view text, const Vocabulary& vocab,
                                       std::size_t max_len, std::size_t& len) {
  const auto tokens = tokenize(text);
  len = std::min(tokens.size(), max_len);
  std::vector<std::int32_t> seq(max_len, Vocabulary::kPad);
  for (std::size_t i = 0; i < len; ++i) seq[i] = vocab.index_of(tokens[i]);
  return seq;
}

}  // namespace

EncodedProduct encode_product_text(const Product& product, const Vocabulary& vocab,
                                   SequenceLengths lengths) {
  if (lengths.title < 1 || lengths.description < 1) {
    throw UsageError("encode_product_text: sequence lengths must be >= 1");
  }
  EncodedProduct e;
  e.product_id = product.product_id;
  e.title_seq = encode_field(product.title, vocab, lengths.title, e.title_len);
  if (e.title_len == 0) {
    throw DataError("product " + product.product_id + ": title has no tokens");
  }
  e.desc_seq = encode_field(product.description, vocab, lengths.description, e.desc_len);
  // An empty description still has to feed the description encoder.
  if (e.desc_len == 0) {
    e.desc_seq[0] = Vocabulary::kOov;
    e.desc_len = 1;
  }
  return e;
}

std::vector<EncodedProduct> encode_catalog(const std::vector<Product>& products,
                                           const Vocabulary& vocab, SequenceLengths lengths) {
  std::vector<EncodedProduct> out;
  out.reserve(products.size());
  for (const auto& p : products) out.push_back(encode_product_text(p, vocab, lengths));
  return out;
}

}  // namespace altrec
