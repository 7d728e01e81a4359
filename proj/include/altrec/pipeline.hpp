#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "altrec/neural.hpp"

namespace altrec {

/// Every tunable of the pipeline with its module default. Input paths left
/// empty resolve to the standard file names inside the workspace.
struct PipelineConfig {
  std::filesystem::path workspace = "workspace";
  std::filesystem::path catalog, pairs, sessions, attributes, schema;

  // catalog
  int min_count = 2;
  std::size_t title_len = 16;
  std::size_t desc_len = 96;
  // compare_graph
  int neg_ratio = 3;
  int positives_per_anchor = 1;
  double val_fraction = 0.1;
  // neural
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  int max_epochs = 50;
  int patience = 3;
  std::string loss = "contrastive";
  // ann + recommendation
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 100;
  double threshold = 0.8;
  std::size_t n = 10;
  // synth
  std::size_t families = 4;
  std::size_t products_per_family = 250;
  std::size_t synth_sessions = 2000;
  double no_attribute_fraction = 0.4;
  double uncompared_fraction = 0.3;

  std::uint64_t seed = 7;
  unsigned threads = 1;

  std::filesystem::path catalog_path() const;
  std::filesystem::path pairs_path() const;
  std::filesystem::path sessions_path() const;
  std::filesystem::path attributes_path() const;
  std::filesystem::path schema_path() const;
  std::filesystem::path artifact(const std::string& name) const { return workspace / name; }
};

/// key=value record of the fingerprints a stage consumed and produced.
/// Downstream stages check their inputs against it.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::string& get(const std::filesystem::path& source, const std::string& key) const;
  void save(const std::filesystem::path& path) const;
  /// Throws MissingFileError naming the path when the stage has not run.
  static Manifest load(const std::filesystem::path& path);

  /// Records sha256 of `file` under `key`.
  void record(const std::string& key, const std::filesystem::path& file);
  /// Throws MissingFileError if `file` is absent and StaleArtifactError if its
  /// sha256 differs from the one recorded under `key`.
  void verify(const std::filesystem::path& manifest_path, const std::string& key,
              const std::filesystem::path& file) const;

 private:
  std::map<std::string, std::string> entries_;
};

// Stages. Each writes its artifacts and a manifest into the workspace and
// returns a one-line summary.
std::string run_synth(const PipelineConfig& config);
std::string run_sample(const PipelineConfig& config);
std::string run_train(const PipelineConfig& config);
std::string run_embed(const PipelineConfig& config, bool text_export = false);
std::string run_index(const PipelineConfig& config);
/// With an anchor, prints that anchor's list to `out` and writes nothing.
std::string run_recommend(const PipelineConfig& config, const std::optional<std::string>& anchor,
                          std::ostream& out);
std::string run_evaluate(const PipelineConfig& config);

}  // namespace altrec
