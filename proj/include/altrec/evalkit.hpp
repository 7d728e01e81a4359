#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "altrec/recommendation.hpp"

namespace altrec {

struct Session {
  std::string session_id;
  std::string anchor_id;
  std::set<std::string> purchased_ids;  // never empty

  bool operator==(const Session&) const = default;
};

/// CSV `session_id,anchor_id,p1|p2|...`. Sessions without purchases are
/// skipped with a warning.
std::vector<Session> load_sessions(const std::filesystem::path& path);
void save_sessions(const std::filesystem::path& path, const std::vector<Session>& sessions);

/// |top-k ∩ purchased| / k; missing slots count as misses.
double precision_at_k(const std::vector<std::string>& recommended, const std::set<std::string>& purchased,
                      std::size_t k);

/// |top-k ∩ purchased| / |purchased|. Throws UsageError for an empty purchase set.
double recall_at_k(const std::vector<std::string>& recommended, const std::set<std::string>& purchased,
                   std::size_t k);

struct NamedRecommender {
  std::string name;
  const Recommender* recommender;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;

  bool operator==(const PrecisionRecall&) const = default;
};

struct MetricsTable {
  std::vector<std::string> algorithms;  // row order
  std::vector<std::size_t> ks;
  std::map<std::string, std::vector<PrecisionRecall>> scores;  // algorithm -> one entry per k
  std::size_t sessions = 0;

  const PrecisionRecall& at(const std::string& algorithm, std::size_t k) const;
};

/// Means over all sessions; an anchor a recommender cannot cover scores 0.
/// Sums run in session_id order.
MetricsTable evaluate(const std::vector<NamedRecommender>& recommenders, const std::vector<Session>& sessions,
                      const std::vector<std::size_t>& ks = {1, 5, 10});

/// Sessions whose anchor gets a non-empty list from every named recommender.
std::vector<Session> filter_covered_sessions(const std::vector<Session>& sessions,
                                             const std::vector<NamedRecommender>& recommenders);

/// Fraction of catalog products with at least one recommendation.
double anchor_coverage(const Recommender& recommender, const std::vector<std::string>& catalog);

/// (covered_a - covered_b) / covered_b.
double relative_lift(double coverage_a, double coverage_b);

/// `algorithm,precision@k...,recall@k...` rows with %.17g values.
std::string render_metrics_csv(const MetricsTable& table);
/// Fixed-width table of percentages in the Precision | Recall layout.
std::string render_metrics_text(const MetricsTable& table, const std::string& title);

}  // namespace altrec
