#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "altrec/baselines.hpp"
#include "altrec/catalog.hpp"
#include "altrec/compare_graph.hpp"
#include "altrec/evalkit.hpp"

namespace altrec {

struct SynthOptions {
  std::size_t families = 4;
  std::size_t products_per_family = 250;
  std::size_t sessions = 2000;
  double no_attribute_fraction = 0.4;
  double uncompared_fraction = 0.3;
  double in_family_purchase_probability = 0.9;
  std::uint64_t seed = 7;
};

/// A desk-scale stand-in for a retail catalog: product families with disjoint
/// core nouns over shared function words, intra-family co-compare pairs, and
/// purchase sessions that mostly stay inside the anchor's family.
struct SynthData {
  std::vector<Product> products;
  std::map<std::string, std::size_t> family;  // product_id -> family
  // Raw co-compare lines (id1, id2) with multiplicity and either direction.
  std::vector<std::pair<std::string, std::string>> pair_lines;
  AttributeTable attributes;
  AttributeSchema schema;
  std::vector<Session> sessions;
};

SynthData generate_synth(const SynthOptions& options);

struct SynthPaths {
  std::filesystem::path catalog, pairs, sessions, attributes, schema, families;
};

/// Writes catalog (JSON lines), pairs, sessions, attributes, schema and a
/// product_id,family truth file.
void write_synth(const SynthData& data, const SynthPaths& paths);

std::map<std::string, std::size_t> load_families(const std::filesystem::path& path);

}  // namespace altrec
