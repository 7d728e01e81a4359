#include "altrec/compare_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {

ComparePair ComparePair::make(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return ComparePair{std::move(a), std::move(b)};
}

PairStreamResult read_pair_stream(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  PairStreamResult result;
  std::string line;
  std::size_t line_no = 0;
  auto skip = [&](const std::string& reason) {
    ++result.malformed_lines;
    result.warnings.push_back("line " + std::to_string(line_no) + ": " + reason);
    spdlog::warn("{}:{}: skipped: {}", path.string(), line_no, reason);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    auto cols = io::split(body, ',');
    if (cols.size() != 3) {
      skip("expected 3 columns");
      continue;
    }
    for (auto& c : cols) c = std::string(io::trim(c));
    if (line_no == 1 && cols[2] != "0" && cols[2] != "1" && cols[2] != "-1") continue;  // header
    if (cols[0].empty() || cols[1].empty()) {
      skip("empty product id");
      continue;
    }
    if (cols[2] != "1") {
      if (cols[2] != "0" && cols[2] != "-1") skip("flag must be 0 or 1");
      continue;
    }
    if (cols[0] == cols[1]) {
      ++result.self_pairs;
      result.warnings.push_back("line " + std::to_string(line_no) + ": self-pair dropped");
      spdlog::warn("{}:{}: self-pair {} dropped", path.string(), line_no, cols[0]);
      continue;
    }
    result.pairs.push_back(ComparePair::make(std::move(cols[0]), std::move(cols[1])));
  }
  return result;
}

std::vector<ComparePair> dedupe_pairs(const std::vector<ComparePair>& pairs) {
  std::set<ComparePair> seen;
  std::vector<ComparePair> out;
  for (const auto& p : pairs) {
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

std::vector<ComparePair> load_pairs(const std::filesystem::path& path) {
  return dedupe_pairs(read_pair_stream(path).pairs);
}

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

std::size_t ComponentSet::component_of(const std::string& id) const {
  auto it = membership.find(id);
  if (it == membership.end()) throw DataError("product not in any component: " + id);
  return it->second;
}

bool ComponentSet::same_component(const std::string& a, const std::string& b) const {
  return component_of(a) == component_of(b);
}

ComponentSet connected_components(const std::vector<ComparePair>& pairs) {
  std::vector<std::string> ids;
  ids.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    ids.push_back(p.product_id_1);
    ids.push_back(p.product_id_2);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  DisjointSet dsu(ids.size());
  for (const auto& p : pairs) dsu.unite(index_of(p.product_id_1), index_of(p.product_id_2));

  // ids are sorted, so components come out ordered by smallest member and
  // each component's members come out sorted.
  ComponentSet out;
  std::map<std::size_t, std::size_t> root_to_component;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto root = dsu.find(i);
    auto [it, inserted] = root_to_component.emplace(root, out.components.size());
    if (inserted) out.components.emplace_back();
    out.components[it->second].push_back(ids[i]);
    out.membership.emplace(ids[i], it->second);
  }
  return out;
}

std::vector<TrainingTriple> sample_triples(const ComponentSet& components,
                                           const SamplingOptions& options) {
  if (options.neg_ratio < 1) throw UsageError("sample_triples: neg_ratio must be >= 1");
  if (options.positives_per_anchor < 1) {
    throw UsageError("sample_triples: positives_per_anchor must be >= 1");
  }
  const auto& comps = components.components;
  if (comps.size() < 2) {
    throw NoNegativePoolError("negative sampling needs at least 2 connected components, got " +
                              std::to_string(comps.size()));
  }
  std::mt19937_64 rng(options.seed);
  std::vector<TrainingTriple> triples;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& members = comps[c];
    for (std::size_t a = 0; a < members.size(); ++a) {
      const auto& anchor = members[a];
      for (int k = 0; k < options.positives_per_anchor; ++k) {
        // Uniform over the component minus the anchor.
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 2);
        auto j = pick(rng);
        if (j >= a) ++j;
        triples.push_back({anchor, members[j], 1});
      }
      const int negatives = options.neg_ratio * options.positives_per_anchor;
      for (int k = 0; k < negatives; ++k) {
        std::uniform_int_distribution<std::size_t> pick_comp(0, comps.size() - 2);
        auto other = pick_comp(rng);
        if (other >= c) ++other;
        const auto& pool = comps[other];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        triples.push_back({anchor, pool[pick(rng)], 0});
      }
    }
  }
  return triples;
}

TripleSplit split_train_validation(const std::vector<TrainingTriple>& triples,
                                   double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw UsageError("split_train_validation: val_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const int label = triples[i].label;
    if (label != 0 && label != 1) throw DataError("triple label must be 0 or 1");
    by_class[label].push_back(i);
  }
  for (int label = 0; label < 2; ++label) {
    if (by_class[label].size() < 2) {
      throw DataError("split_train_validation: need at least 2 triples with label " +
                      std::to_string(label));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> in_validation(triples.size(), false);
  for (int label = 1; label >= 0; --label) {
    auto& idx = by_class[label];
    std::shuffle(idx.begin(), idx.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * val_fraction));
    take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    for (std::size_t i = 0; i < take; ++i) in_validation[idx[i]] = true;
  }
  TripleSplit split;
  // Both halves keep the input order; the shuffle only decides membership.
  for (std::size_t i = 0; i < triples.size(); ++i) {
    (in_validation[i] ? split.validation : split.train).push_back(triples[i]);
  }
  return split;
}

void save_triples(const std::filesystem::path& path, const std::vector<TrainingTriple>& triples) {
  auto out = io::open_output(path);
  for (const auto& t : triples) out << t.anchor_id << ',' << t.other_id << ',' << t.label << '\n';
}

std::vector<TrainingTriple> load_triples(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::vector<TrainingTriple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto cols = io::split(io::trim(line), ',');
    if (cols.size() != 3 || (cols[2] != "0" && cols[2] != "1") || cols[0] == cols[1]) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed triple");
    }
    triples.push_back({cols[0], cols[1], cols[2] == "1" ? 1 : 0});
  }
  return triples;
}

}  // namespace altrec
