#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "altrec/embedding_store.hpp"
#include "altrec/recommendation.hpp"

namespace altrec {

struct Neighbor {
  std::string product_id;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct AnnParams {
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::uint64_t seed = 7;

  bool operator==(const AnnParams&) const = default;
};

/// Hierarchical navigable small-world graph over L2-normalized embeddings.
/// Nodes are inserted in product_id order, so node index order equals id order
/// and every ranking tie is broken by product_id ascending.
class AnnIndex {
 public:
  static AnnIndex build(const EmbeddingStore& store, const AnnParams& params = {});

  /// Approximate top-k by cosine similarity, sorted descending. Throws
  /// ZeroNormError for a zero query and UsageError for k < 1 or ef_search < k.
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k, std::size_t ef_search) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const AnnParams& params() const noexcept { return params_; }
  const std::string& store_fingerprint() const noexcept { return store_fingerprint_; }
  int max_level() const noexcept { return max_level_; }
  std::uint32_t entry_point() const noexcept { return entry_; }
  const std::string& id_of(std::uint32_t node) const { return ids_[node]; }
  int level_of(std::uint32_t node) const { return static_cast<int>(links_[node].size()) - 1; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int level) const {
    return links_[node][static_cast<std::size_t>(level)];
  }
  /// Edges added after construction to make every node reachable at level 0.
  std::size_t repaired_links() const noexcept { return repaired_; }

  /// Binary layout: magic "ALTRECIX", u32 version, u32 dim, u64 m,
  /// u64 ef_construction, u64 seed, store fingerprint, u64 count, u32 entry,
  /// i32 max level, then per node: id, u32 levels, per level u32 degree and
  /// u32 neighbor indices, followed by dim float64 normalized values.
  void save(const std::filesystem::path& path) const;
  static AnnIndex load(const std::filesystem::path& path);

  bool operator==(const AnnIndex&) const = default;

 private:
  struct Candidate {
    double distance;
    std::uint32_t node;
    auto operator<=>(const Candidate&) const = default;
  };

  std::span<const double> vec(std::uint32_t node) const { return {&vectors_[node * dim_], dim_}; }
  double distance(std::span<const double> q, std::uint32_t node) const;
  std::vector<Candidate> search_layer(std::span<const double> q, const std::vector<std::uint32_t>& entries,
                                      std::size_t ef, int level) const;
  std::uint32_t greedy_descend(std::span<const double> q, int down_to) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates, std::size_t m) const;
  void insert(std::uint32_t node, int level);
  void repair_reachability();
  std::size_t max_degree(int level) const { return level == 0 ? 2 * params_.m : params_.m; }

  AnnParams params_;
  std::size_t dim_ = 0;
  std::string store_fingerprint_;
  std::vector<std::string> ids_;
  std::vector<double> vectors_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // node -> level -> neighbors
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
  std::size_t repaired_ = 0;
};

/// Exhaustive cosine top-k with the same normalization and tie-breaking as
/// AnnIndex::knn.
std::vector<Neighbor> exact_knn(const EmbeddingStore& store, std::span<const double> query, std::size_t k);

/// Fraction of `exact` ids present in `approx`.
double recall(const std::vector<Neighbor>& approx, const std::vector<Neighbor>& exact);

struct RecommendOptions {
  std::size_t n = 10;
  double threshold = 0.8;
  std::size_t ef_search = 100;
};

/// Fetches n+1 neighbors, drops the anchor and anything below the threshold,
/// keeps at most n and ranks them from 1. Throws DataError for an unknown anchor.
std::vector<Recommendation> top_n_recommendations(const AnnIndex& index, const EmbeddingStore& store,
                                                  const std::string& anchor_id,
                                                  const RecommendOptions& options = {});

/// Thresholded ANN top-n over the embedding store.
class EmbeddingRecommender : public Recommender {
 public:
  EmbeddingRecommender(const AnnIndex& index, const EmbeddingStore& store, double threshold = 0.8,
                       std::size_t ef_search = 100)
      : index_(&index), store_(&store), threshold_(threshold), ef_search_(ef_search) {}
  std::vector<Recommendation> recommend(const std::string& anchor_id, std::size_t n) const override;

 private:
  const AnnIndex* index_;
  const EmbeddingStore* store_;
  double threshold_;
  std::size_t ef_search_;
};

}  // namespace altrec
