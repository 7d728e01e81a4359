#include "altrec/ann.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <queue>
#include <random>

#include "altrec/error.hpp"
#include "altrec/io.hpp"

namespace altrec {
namespace {

// Shared by the index and the exact oracle so both see identical numbers.
std::vector<double> normalized(std::span<const double> v) {
  double n2 = 0.0;
  for (const double x : v) n2 += x * x;
  if (n2 == 0.0) throw ZeroNormError("zero-norm vector");
  const double inv = 1.0 / std::sqrt(n2);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double to_similarity(double distance) { return std::clamp(-distance, -1.0, 1.0); }

}  // namespace

// Distance is the negated dot product of unit vectors: it orders exactly like
// 1 - cosine without the rounding of the subtraction.
double AnnIndex::distance(std::span<const double> q, std::uint32_t node) const {
  return -dot(q, vec(node));
}

std::vector<AnnIndex::Candidate> AnnIndex::search_layer(std::span<const double> q,
                                                        const std::vector<std::uint32_t>& entries,
                                                        std::size_t ef, int level) const {
  std::vector<char> visited(ids_.size(), 0);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> best;  // worst on top
  for (const auto e : entries) {
    if (visited[e]) continue;
    visited[e] = 1;
    const Candidate c{distance(q, e), e};
    frontier.push(c);
    best.push(c);
    if (best.size() > ef) best.pop();
  }
  while (!frontier.empty()) {
    const auto current = frontier.top();
    if (best.size() >= ef && best.top() < current) break;
    frontier.pop();
    for (const auto nb : links_[current.node][static_cast<std::size_t>(level)]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const Candidate c{distance(q, nb), nb};
      if (best.size() < ef || c < best.top()) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint32_t AnnIndex::greedy_descend(std::span<const double> q, int down_to) const {
  std::uint32_t cur = entry_;
  Candidate best{distance(q, cur), cur};
  for (int level = max_level_; level > down_to; --level) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto nb : links_[best.node][static_cast<std::size_t>(level)]) {
        const Candidate c{distance(q, nb), nb};
        if (c < best) {
          best = c;
          changed = true;
        }
      }
    }
  }
  return best.node;
}

// Keeps a candidate only if it is closer to the base point than to every
// neighbor already kept. `candidates` must be sorted ascending.
std::vector<std::uint32_t> AnnIndex::select_neighbors(std::vector<Candidate> candidates, std::size_t m) const {
  std::vector<std::uint32_t> kept;
  for (const auto& c : candidates) {
    if (kept.size() >= m) break;
    bool good = true;
    for (const auto r : kept) {
      const Candidate to_kept{-dot(vec(c.node), vec(r)), r};
      if (to_kept.distance < c.distance) {
        good = false;
        break;
      }
    }
    if (good) kept.push_back(c.node);
  }
  return kept;
}

void AnnIndex::insert(std::uint32_t node, int level) {
  links_[node].assign(static_cast<std::size_t>(level) + 1, {});
  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const auto q = vec(node);
  std::vector<std::uint32_t> entries{greedy_descend(q, level)};
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    auto found = search_layer(q, entries, params_.ef_construction, lc);
    auto chosen = select_neighbors(found, max_degree(lc));
    links_[node][static_cast<std::size_t>(lc)] = chosen;
    for (const auto nb : chosen) {
      auto& back = links_[nb][static_cast<std::size_t>(lc)];
      back.push_back(node);
      if (back.size() > max_degree(lc)) {
        std::vector<Candidate> pool;
        pool.reserve(back.size());
        for (const auto x : back) pool.push_back({-dot(vec(nb), vec(x)), x});
        std::sort(pool.begin(), pool.end());
        back = select_neighbors(std::move(pool), max_degree(lc));
      }
    }
    entries.clear();
    for (const auto& c : found) entries.push_back(c.node);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_ = node;
  }
}

void AnnIndex::repair_reachability() {
  const std::size_t n = ids_.size();
  std::vector<char> reached(n, 0);
  auto flood = [&](std::uint32_t start) {
    std::deque<std::uint32_t> queue{start};
    reached[start] = 1;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      for (const auto nb : links_[cur][0]) {
        if (!reached[nb]) {
          reached[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
  };
  flood(entry_);
  for (std::uint32_t u = 0; u < n; ++u) {
    if (reached[u]) continue;
    // Link u from the most similar reachable node that still has room.
    std::optional<Candidate> host;
    for (std::uint32_t r = 0; r < n; ++r) {
      if (!reached[r] || links_[r][0].size() >= max_degree(0)) continue;
      const Candidate c{-dot(vec(u), vec(r)), r};
      if (!host || c < *host) host = c;
    }
    if (!host) throw Error("ann: no node with spare degree to repair reachability");
    links_[host->node][0].push_back(u);
    ++repaired_;
    flood(u);
  }
}

AnnIndex AnnIndex::build(const EmbeddingStore& store, const AnnParams& params) {
  if (store.entries.empty()) throw UsageError("build_index: empty store");
  if (params.m < 2) throw UsageError("build_index: m must be >= 2");
  if (params.ef_construction < 1) throw UsageError("build_index: ef_construction must be >= 1");
  AnnIndex index;
  index.params_ = params;
  index.dim_ = store.dim;
  index.store_fingerprint_ = altrec::store_fingerprint(store);
  index.ids_.reserve(store.size());
  index.vectors_.reserve(store.size() * store.dim);
  for (const auto& [id, v] : store.entries) {
    if (v.size() != store.dim) throw DataError("build_index: dimension mismatch for " + id);
    index.ids_.push_back(id);
    const auto u = normalized(v);
    index.vectors_.insert(index.vectors_.end(), u.begin(), u.end());
  }
  index.links_.resize(index.ids_.size());

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level_mult = 1.0 / std::log(static_cast<double>(params.m));
  for (std::uint32_t node = 0; node < index.ids_.size(); ++node) {
    const double r = 1.0 - unit(rng);  // (0, 1]
    index.insert(node, static_cast<int>(-std::log(r) * level_mult));
  }
  index.repair_reachability();
  return index;
}

std::vector<Neighbor> AnnIndex::knn(std::span<const double> query, std::size_t k, std::size_t ef_search) const {
  if (k < 1) throw UsageError("knn: k must be >= 1");
  if (ef_search < k) throw UsageError("knn: ef_search must be >= k");
  if (query.size() != dim_) throw UsageError("knn: query dimension mismatch");
  const auto q = normalized(query);
  // The base search also starts from the global entry point, which reaches
  // every node, so ef_search >= size() is exhaustive.
  std::vector<std::uint32_t> entries{greedy_descend(q, 0), entry_};
  const auto found = search_layer(q, entries, ef_search, 0);
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < found.size() && i < k; ++i) {
    out.push_back({ids_[found[i].node], to_similarity(found[i].distance)});
  }
  return out;
}

std::vector<Neighbor> exact_knn(const EmbeddingStore& store, std::span<const double> query, std::size_t k) {
  if (k < 1) throw UsageError("exact_knn: k must be >= 1");
  if (query.size() != store.dim) throw UsageError("exact_knn: query dimension mismatch");
  const auto q = normalized(query);
  struct Scored {
    double distance;
    std::size_t order;
    const std::string* id;
  };
  std::vector<Scored> all;
  all.reserve(store.size());
  std::size_t order = 0;
  for (const auto& [id, v] : store.entries) {
    all.push_back({-dot(q, normalized(v)), order++, &id});
  }
  const auto take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Scored& a, const Scored& b) {
                      return a.distance != b.distance ? a.distance < b.distance : a.order < b.order;
                    });
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back({*all[i].id, to_similarity(all[i].distance)});
  return out;
}

double recall(const std::vector<Neighbor>& approx, const std::vector<Neighbor>& exact) {
  if (exact.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& e : exact) {
    for (const auto& a : approx) {
      if (a.product_id == e.product_id) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(exact.size());
}

std::vector<Recommendation> top_n_recommendations(const AnnIndex& index, const EmbeddingStore& store,
                                                  const std::string& anchor_id,
                                                  const RecommendOptions& options) {
  if (options.n < 1) throw UsageError("top_n_recommendations: n must be >= 1");
  auto it = store.entries.find(anchor_id);
  if (it == store.entries.end()) throw DataError("unknown anchor: " + anchor_id);
  const auto k = options.n + 1;
  const auto neighbors = index.knn(it->second, k, std::max(options.ef_search, k));
  std::vector<Recommendation> out;
  for (const auto& nb : neighbors) {
    if (nb.product_id == anchor_id || nb.similarity < options.threshold) continue;
    if (out.size() == options.n) break;
    out.push_back({anchor_id, nb.product_id, nb.similarity, static_cast<int>(out.size()) + 1});
  }
  return out;
}

namespace {
constexpr char kIndexMagic[8] = {'A', 'L', 'T', 'R', 'E', 'C', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

void AnnIndex::save(const std::filesystem::path& path) const {
  auto out = io::open_output(path, true);
  out.write(kIndexMagic, sizeof(kIndexMagic));
  io::write_pod(out, kIndexVersion);
  io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  io::write_pod<std::uint64_t>(out, params_.m);
  io::write_pod<std::uint64_t>(out, params_.ef_construction);
  io::write_pod<std::uint64_t>(out, params_.seed);
  io::write_string(out, store_fingerprint_);
  io::write_pod<std::uint64_t>(out, ids_.size());
  io::write_pod<std::uint32_t>(out, entry_);
  io::write_pod<std::int32_t>(out, max_level_);
  io::write_pod<std::uint64_t>(out, repaired_);
  for (std::uint32_t node = 0; node < ids_.size(); ++node) {
    io::write_string(out, ids_[node]);
    io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(links_[node].size()));
    for (const auto& level : links_[node]) {
      io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(level.size()));
      for (const auto nb : level) io::write_pod(out, nb);
    }
    const auto v = vec(node);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing index " + path.string());
}

AnnIndex AnnIndex::load(const std::filesystem::path& path) {
  auto in = io::open_input(path, true);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kIndexMagic))) {
    throw DataError(path.string() + ": not an ANN index");
  }
  if (io::read_pod<std::uint32_t>(in) != kIndexVersion) {
    throw DataError(path.string() + ": unsupported index version");
  }
  AnnIndex index;
  index.dim_ = io::read_pod<std::uint32_t>(in);
  index.params_.m = io::read_pod<std::uint64_t>(in);
  index.params_.ef_construction = io::read_pod<std::uint64_t>(in);
  index.params_.seed = io::read_pod<std::uint64_t>(in);
  index.store_fingerprint_ = io::read_string(in);
  const auto n = io::read_pod<std::uint64_t>(in);
  index.entry_ = io::read_pod<std::uint32_t>(in);
  index.max_level_ = io::read_pod<std::int32_t>(in);
  index.repaired_ = io::read_pod<std::uint64_t>(in);
  index.ids_.resize(n);
  index.links_.resize(n);
  index.vectors_.resize(n * index.dim_);
  for (std::uint32_t node = 0; node < n; ++node) {
    index.ids_[node] = io::read_string(in);
    index.links_[node].resize(io::read_pod<std::uint32_t>(in));
    for (auto& level : index.links_[node]) {
      level.resize(io::read_pod<std::uint32_t>(in));
      for (auto& nb : level) {
        nb = io::read_pod<std::uint32_t>(in);
        if (nb >= n) throw DataError(path.string() + ": neighbor index out of range");
      }
    }
    in.read(reinterpret_cast<char*>(&index.vectors_[node * index.dim_]),
            static_cast<std::streamsize>(index.dim_ * sizeof(double)));
    if (!in) throw DataError(path.string() + ": truncated index");
  }
  if (n > 0 && index.entry_ >= n) throw DataError(path.string() + ": entry point out of range");
  return index;
}

}  // namespace altrec

namespace altrec {

std::vector<Recommendation> EmbeddingRecommender::recommend(const std::string& anchor_id, std::size_t n) const {
  if (!store_->entries.contains(anchor_id)) return {};
  return top_n_recommendations(*index_, *store_, anchor_id, {n, threshold_, ef_search_});
}

}  // namespace altrec
