#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace altrec {

// Unordered co-compare pair, stored with product_id_1 < product_id_2.
struct ComparePair {
  std::string product_id_1;
  std::string product_id_2;

  static ComparePair make(std::string a, std::string b);
  bool operator==(const ComparePair&) const = default;
  auto operator<=>(const ComparePair&) const = default;
};

struct PairStreamResult {
  // Every flag=1 pair in file order, canonicalized but not deduplicated.
  std::vector<ComparePair> pairs;
  std::size_t malformed_lines = 0;
  std::size_t self_pairs = 0;
  std::vector<std::string> warnings;
};

/// Reads `id1,id2,flag` lines (an optional header is recognized and skipped),
/// keeping flag=1 rows and dropping self-pairs. Order and multiplicity are kept.
PairStreamResult read_pair_stream(const std::filesystem::path& path);

/// read_pair_stream followed by unordered deduplication (first occurrence wins).
std::vector<ComparePair> load_pairs(const std::filesystem::path& path);

std::vector<ComparePair> dedupe_pairs(const std::vector<ComparePair>& pairs);

struct ComponentSet {
  // Each component is sorted; components are ordered by their smallest id.
  std::vector<std::vector<std::string>> components;
  std::unordered_map<std::string, std::size_t> membership;

  std::size_t component_of(const std::string& id) const;
  bool same_component(const std::string& a, const std::string& b) const;
};

ComponentSet connected_components(const std::vector<ComparePair>& pairs);

struct TrainingTriple {
  std::string anchor_id;
  std::string other_id;
  int label = 0;

  bool operator==(const TrainingTriple&) const = default;
};

struct SamplingOptions {
  int neg_ratio = 3;
  int positives_per_anchor = 1;
  std::uint64_t seed = 7;
};

/// For every product of every component: `positives_per_anchor` partners from
/// its own component, then `neg_ratio` negatives per positive drawn by picking
/// another component uniformly and a member of it uniformly.
/// Throws NoNegativePoolError with fewer than two components.
std::vector<TrainingTriple> sample_triples(const ComponentSet& components,
                                           const SamplingOptions& options);

struct TripleSplit {
  std::vector<TrainingTriple> train;
  std::vector<TrainingTriple> validation;
};

/// Stratified shuffled split; each class contributes round(n_class * fraction)
/// triples (at least one, at most n_class - 1) to validation.
TripleSplit split_train_validation(const std::vector<TrainingTriple>& triples,
                                   double val_fraction, std::uint64_t seed);

void save_triples(const std::filesystem::path& path, const std::vector<TrainingTriple>& triples);
std::vector<TrainingTriple> load_triples(const std::filesystem::path& path);

}  // namespace altrec
