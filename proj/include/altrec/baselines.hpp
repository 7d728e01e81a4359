#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "altrec/ann.hpp"
#include "altrec/compare_graph.hpp"
#include "altrec/recommendation.hpp"

namespace altrec {

// ---- Attribute-based -------------------------------------------------------

struct AttributeSpec {
  enum class Kind { categorical, numerical };
  std::string name;
  Kind kind = Kind::categorical;
  std::vector<std::string> values;  // categorical: one-hot slot order
  double min = 0.0;                 // numerical
  double max = 0.0;

  std::size_t width() const { return kind == Kind::categorical ? values.size() : 1; }
};

struct AttributeSchema {
  std::vector<AttributeSpec> attributes;

  std::size_t dimension() const;
  /// CSV `name,kind,spec`; kind is `categorical` (spec `v1|v2|...`) or
  /// `numerical` (spec `min|max`).
  static AttributeSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// product_id -> attribute_name -> raw value
using AttributeTable = std::map<std::string, std::map<std::string, std::string>>;

/// CSV `product_id,attribute_name,attribute_value`. Values may not contain commas.
AttributeTable load_attributes(const std::filesystem::path& path);
void save_attributes(const std::filesystem::path& path, const AttributeTable& table);

struct AttributeVector {
  std::string product_id;
  std::vector<double> values;
};

struct AttributeVectors {
  std::vector<AttributeVector> vectors;  // catalog order
  std::vector<std::string> excluded;     // products with none of the schema attributes
  std::size_t unknown_values = 0;        // categorical values outside the schema, or unparseable numbers
};

AttributeVectors build_attribute_vectors(const std::vector<std::string>& catalog_ids,
                                         const AttributeTable& table, const AttributeSchema& schema);

/// Exact cosine top-n over attribute vectors with the anchor excluded and ties
/// broken by id. A zero vector has similarity 0 to everything.
class AttributeRecommender : public Recommender {
 public:
  explicit AttributeRecommender(const std::vector<AttributeVector>& vectors);
  /// Throws NoCoverageError when the anchor has no attribute vector.
  std::vector<Recommendation> recommend_or_throw(const std::string& anchor_id, std::size_t n) const;
  std::vector<Recommendation> recommend(const std::string& anchor_id, std::size_t n) const override;
  bool covers(const std::string& id) const { return vectors_.contains(id); }

 private:
  std::map<std::string, std::vector<double>> vectors_;
};

std::vector<Recommendation> attribute_recommend(const std::string& anchor_id,
                                                const AttributeRecommender& vectors, std::size_t n);

// ---- Frequently compared ---------------------------------------------------

class CoCompareCounts {
 public:
  void add(const ComparePair& pair, int times = 1);
  /// Symmetric; 0 for pairs never compared.
  int count(const std::string& a, const std::string& b) const;
  std::size_t size() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }
  /// (partner, count) for every product the anchor was compared with.
  const std::vector<std::pair<std::string, int>>& partners(const std::string& anchor) const;

 private:
  std::map<ComparePair, int> counts_;
  std::map<std::string, std::vector<std::pair<std::string, int>>> partners_;
};

/// Aggregates the raw (non-deduplicated) pair stream into unordered counts.
CoCompareCounts build_cocompare_counts(const std::vector<ComparePair>& stream);
CoCompareCounts build_cocompare_counts(const std::filesystem::path& pairs_path);

/// Partners sorted by count descending then id ascending, truncated to n. The
/// similarity field carries the raw count.
std::vector<Recommendation> frequently_compared_recommend(const std::string& anchor_id,
                                                          const CoCompareCounts& counts, std::size_t n);

class FrequentlyComparedRecommender : public Recommender {
 public:
  explicit FrequentlyComparedRecommender(CoCompareCounts counts) : counts_(std::move(counts)) {}
  std::vector<Recommendation> recommend(const std::string& anchor_id, std::size_t n) const override {
    return frequently_compared_recommend(anchor_id, counts_, n);
  }

 private:
  CoCompareCounts counts_;
};

}  // namespace altrec
