#pragma once

#include <map>
#include <string>
#include <vector>

#include "altrec/evalkit.hpp"
#include "altrec/recommendation.hpp"

namespace altrec::testing {

// Replays a saved recommendation table.
class TableRecommender : public Recommender {
 public:
  explicit TableRecommender(const std::vector<Recommendation>& recs) {
    for (const auto& r : recs) table_[r.anchor_id].push_back(r);
  }
  std::vector<Recommendation> recommend(const std::string& anchor_id, std::size_t n) const override {
    auto it = table_.find(anchor_id);
    if (it == table_.end()) return {};
    std::vector<Recommendation> out(it->second.begin(), it->second.begin() + std::min(n, it->second.size()));
    return out;
  }

 private:
  std::map<std::string, std::vector<Recommendation>> table_;
};

struct EvalFixture {
  std::vector<Session> sessions;
  TableRecommender attribute, frequent, deep;

  std::vector<NamedRecommender> all() const {
    return {{"Attribute Based", &attribute}, {"Frequently Compared", &frequent}, {"Deep Learning Based", &deep}};
  }
  std::vector<NamedRecommender> baselines() const {
    return {{"Attribute Based", &attribute}, {"Frequently Compared", &frequent}};
  }
};

inline EvalFixture load_eval_fixture(const std::string& dir) {
  return {load_sessions(dir + "/eval_sessions.csv"),
          TableRecommender(load_recommendations(dir + "/eval_recs_attribute.csv")),
          TableRecommender(load_recommendations(dir + "/eval_recs_frequent.csv")),
          TableRecommender(load_recommendations(dir + "/eval_recs_deep.csv"))};
}

using ExpectedRows = std::map<std::string, std::vector<PrecisionRecall>>;

// Frozen output of tests/oracles/eval_fixture.py, k = 1, 5, 10.
inline const ExpectedRows kExpectedRaw{
    {"Attribute Based", {{0.25, 0.14166666666666666}, {0.22000000000000003, 0.55000000000000004}, {0.11500000000000002, 0.56666666666666665}}},
    {"Frequently Compared", {{0.34999999999999998, 0.17499999999999999}, {0.21000000000000005, 0.48333333333333328}, {0.10500000000000002, 0.48333333333333328}}},
    {"Deep Learning Based", {{0.40000000000000002, 0.18333333333333335}, {0.24000000000000005, 0.52499999999999991}, {0.16500000000000004, 0.71666666666666656}}},
};
inline constexpr std::size_t kExpectedFilteredSessions = 13;
inline const ExpectedRows kExpectedFiltered{
    {"Attribute Based", {{0.30769230769230771, 0.17948717948717946}, {0.24615384615384617, 0.61538461538461542}, {0.13076923076923078, 0.64102564102564097}}},
    {"Frequently Compared", {{0.38461538461538464, 0.19230769230769232}, {0.26153846153846155, 0.61538461538461542}, {0.13076923076923078, 0.61538461538461542}}},
    {"Deep Learning Based", {{0.38461538461538464, 0.14102564102564102}, {0.19999999999999998, 0.4358974358974359}, {0.13846153846153847, 0.60256410256410253}}},
};

// Largest absolute difference between a computed table and the frozen rows.
inline double max_deviation(const MetricsTable& table, const ExpectedRows& expected) {
  double worst = 0.0;
  for (const auto& [name, rows] : expected) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& got = table.at(name, table.ks[i]);
      worst = std::max({worst, std::abs(got.precision - rows[i].precision), std::abs(got.recall - rows[i].recall)});
    }
  }
  return worst;
}

}  // namespace altrec::testing
