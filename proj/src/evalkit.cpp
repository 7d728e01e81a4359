#include "altrec/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {

std::vector<Session> load_sessions(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::vector<Session> sessions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    const auto cols = io::split(body, ',');
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty()) {
      spdlog::warn("{}:{}: skipped malformed session", path.string(), line_no);
      continue;
    }
    Session s{cols[0], cols[1], {}};
    for (auto& p : io::split(cols[2], '|')) {
      if (!p.empty()) s.purchased_ids.insert(std::move(p));
    }
    if (s.purchased_ids.empty()) {
      spdlog::warn("{}:{}: session {} has no purchases; skipped", path.string(), line_no, s.session_id);
      continue;
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

void save_sessions(const std::filesystem::path& path, const std::vector<Session>& sessions) {
  auto out = io::open_output(path);
  for (const auto& s : sessions) {
    out << s.session_id << ',' << s.anchor_id << ',';
    bool first = true;
    for (const auto& p : s.purchased_ids) {
      out << (first ? "" : "|") << p;
      first = false;
    }
    out << '\n';
  }
}

namespace {

std::size_t hits_at_k(const std::vector<std::string>& recommended, const std::set<std::string>& purchased,
                      std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < recommended.size() && i < k; ++i) hits += purchased.contains(recommended[i]);
  return hits;
}

std::vector<std::string> neighbor_ids(const std::vector<Recommendation>& recs) {
  std::vector<std::string> ids;
  ids.reserve(recs.size());
  for (const auto& r : recs) ids.push_back(r.neighbor_id);
  return ids;
}

}  // namespace

double precision_at_k(const std::vector<std::string>& recommended, const std::set<std::string>& purchased,
                      std::size_t k) {
  if (k < 1) throw UsageError("precision_at_k: k must be >= 1");
  return static_cast<double>(hits_at_k(recommended, purchased, k)) / static_cast<double>(k);
}

double recall_at_k(const std::vector<std::string>& recommended, const std::set<std::string>& purchased,
                   std::size_t k) {
  if (k < 1) throw UsageError("recall_at_k: k must be >= 1");
  if (purchased.empty()) throw UsageError("recall_at_k: empty purchase set");
  return static_cast<double>(hits_at_k(recommended, purchased, k)) / static_cast<double>(purchased.size());
}

const PrecisionRecall& MetricsTable::at(const std::string& algorithm, std::size_t k) const {
  const auto row = scores.find(algorithm);
  const auto col = std::find(ks.begin(), ks.end(), k);
  if (row == scores.end() || col == ks.end()) throw UsageError("metrics table has no entry " + algorithm);
  return row->second[static_cast<std::size_t>(col - ks.begin())];
}

MetricsTable evaluate(const std::vector<NamedRecommender>& recommenders, const std::vector<Session>& sessions,
                      const std::vector<std::size_t>& ks) {
  if (sessions.empty()) throw UsageError("evaluate: no sessions");
  if (ks.empty()) throw UsageError("evaluate: no cutoffs");
  const auto max_k = *std::max_element(ks.begin(), ks.end());
  std::vector<const Session*> ordered;
  for (const auto& s : sessions) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Session* a, const Session* b) { return a->session_id < b->session_id; });

  MetricsTable table;
  table.ks = ks;
  table.sessions = sessions.size();
  const double count = static_cast<double>(sessions.size());
  for (const auto& named : recommenders) {
    table.algorithms.push_back(named.name);
    std::vector<PrecisionRecall> sums(ks.size());
    for (const auto* s : ordered) {
      const auto recs = neighbor_ids(named.recommender->recommend(s->anchor_id, max_k));
      for (std::size_t i = 0; i < ks.size(); ++i) {
        sums[i].precision += precision_at_k(recs, s->purchased_ids, ks[i]);
        sums[i].recall += recall_at_k(recs, s->purchased_ids, ks[i]);
      }
    }
    for (auto& pr : sums) {
      pr.precision /= count;
      pr.recall /= count;
    }
    table.scores[named.name] = std::move(sums);
  }
  return table;
}

std::vector<Session> filter_covered_sessions(const std::vector<Session>& sessions,
                                             const std::vector<NamedRecommender>& recommenders) {
  std::vector<Session> kept;
  for (const auto& s : sessions) {
    const bool covered = std::all_of(recommenders.begin(), recommenders.end(), [&](const NamedRecommender& r) {
      return !r.recommender->recommend(s.anchor_id, 1).empty();
    });
    if (covered) kept.push_back(s);
  }
  return kept;
}

double anchor_coverage(const Recommender& recommender, const std::vector<std::string>& catalog) {
  if (catalog.empty()) throw UsageError("anchor_coverage: empty catalog");
  std::size_t covered = 0;
  for (const auto& id : catalog) covered += !recommender.recommend(id, 1).empty();
  return static_cast<double>(covered) / static_cast<double>(catalog.size());
}

double relative_lift(double coverage_a, double coverage_b) {
  if (coverage_b == 0.0) throw UsageError("relative_lift: baseline coverage is zero");
  return (coverage_a - coverage_b) / coverage_b;
}

std::string render_metrics_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "algorithm";
  for (const auto k : table.ks) out << ",precision@" << k;
  for (const auto k : table.ks) out << ",recall@" << k;
  out << '\n';
  for (const auto& name : table.algorithms) {
    const auto& row = table.scores.at(name);
    out << name;
    for (const auto& pr : row) out << ',' << io::format_double(pr.precision);
    for (const auto& pr : row) out << ',' << io::format_double(pr.recall);
    out << '\n';
  }
  return out.str();
}

std::string render_metrics_text(const MetricsTable& table, const std::string& title) {
  std::size_t name_width = 9;
  for (const auto& n : table.algorithms) name_width = std::max(name_width, n.size());
  const int cell = 9;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  auto rpad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << title << " (" << table.sessions << " sessions)\n";
  const auto group = table.ks.size() * cell;
  out << pad("", name_width) << "  " << pad("Precision", group) << "  " << "Recall" << '\n';
  out << pad("", name_width) << "  ";
  for (const auto k : table.ks) out << rpad("Top " + std::to_string(k), cell);
  out << "  ";
  for (const auto k : table.ks) out << rpad("Top " + std::to_string(k), cell);
  out << '\n';
  for (const auto& name : table.algorithms) {
    out << pad(name, name_width) << "  ";
    const auto& row = table.scores.at(name);
    char buf[32];
    for (const auto& pr : row) {
      std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * pr.precision);
      out << rpad(buf, cell);
    }
    out << "  ";
    for (const auto& pr : row) {
      std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * pr.recall);
      out << rpad(buf, cell);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace altrec
