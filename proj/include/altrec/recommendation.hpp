#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace altrec {

struct Recommendation {
  std::string anchor_id;
  std::string neighbor_id;
  double similarity = 0.0;  // cosine, or raw co-compare count for that baseline
  int rank = 0;             // 1-based

  bool operator==(const Recommendation&) const = default;
};

/// CSV rows `anchor_id,neighbor_id,rank,similarity` (similarity at %.17g).
void save_recommendations(const std::filesystem::path& path, const std::vector<Recommendation>& recs);
std::vector<Recommendation> load_recommendations(const std::filesystem::path& path);

}  // namespace altrec

namespace altrec {

/// Anything that can produce a ranked alternative list for an anchor. An
/// anchor the algorithm cannot cover yields an empty list.
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual std::vector<Recommendation> recommend(const std::string& anchor_id, std::size_t n) const = 0;
};

}  // namespace altrec
