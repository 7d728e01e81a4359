#include "altrec/pipeline.hpp"

#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "altrec/ann.hpp"
#include "altrec/baselines.hpp"
#include "altrec/catalog.hpp"
#include "altrec/compare_graph.hpp"
#include "altrec/embedding_store.hpp"
#include "altrec/error.hpp"
#include "altrec/evalkit.hpp"
#include "altrec/fingerprint.hpp"
#include "altrec/io.hpp"
#include "altrec/synth.hpp"

namespace altrec {

namespace fs = std::filesystem;

namespace {

fs::path or_default(const fs::path& explicit_path, const fs::path& workspace, const char* name) {
  return explicit_path.empty() ? workspace / name : explicit_path;
}

// Workspace file names.
constexpr const char* kSynthManifest = "synth.manifest";
constexpr const char* kSampleManifest = "sample.manifest";
constexpr const char* kTrainManifest = "train.manifest";
constexpr const char* kEmbedManifest = "embed.manifest";
constexpr const char* kIndexManifest = "index.manifest";
constexpr const char* kRecommendManifest = "recommend.manifest";
constexpr const char* kEvaluateManifest = "evaluate.manifest";

void ensure_workspace(const PipelineConfig& c) {
  std::error_code ec;
  fs::create_directories(c.workspace, ec);
  if (ec) throw DataError("cannot create workspace " + c.workspace.string() + ": " + ec.message());
}

SequenceLengths lengths(const PipelineConfig& c) { return {c.title_len, c.desc_len}; }

// Drops products whose title has no tokens; they cannot be encoded.
std::vector<Product> encodable(std::vector<Product> products) {
  std::vector<Product> out;
  for (auto& p : products) {
    if (tokenize(p.title).empty()) {
      spdlog::warn("product {} skipped: title has no tokens", p.product_id);
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Product> read_catalog(const PipelineConfig& c) {
  auto loaded = load_catalog(c.catalog_path());
  if (loaded.malformed_lines > 0) {
    spdlog::warn("{}: {} malformed lines skipped", c.catalog_path().string(), loaded.malformed_lines);
  }
  return encodable(std::move(loaded.products));
}

// Verifies the raw inputs recorded by `sample` and the vocabulary it wrote.
void verify_sample_inputs(const PipelineConfig& c, const Manifest& sample, bool pairs_too) {
  const auto path = c.artifact(kSampleManifest);
  sample.verify(path, "input.catalog", c.catalog_path());
  if (pairs_too) sample.verify(path, "input.pairs", c.pairs_path());
  sample.verify(path, "output.vocab", c.artifact("vocab.txt"));
}

SiameseModel checked_model(const PipelineConfig& c, const Vocabulary& vocab) {
  const auto train = Manifest::load(c.artifact(kTrainManifest));
  train.verify(c.artifact(kTrainManifest), "output.model", c.artifact("model.ckpt"));
  auto model = load_checkpoint(c.artifact("model.ckpt"));
  if (model.vocab_fingerprint != vocab.fingerprint()) {
    throw StaleArtifactError("model.ckpt was trained on a different vocabulary; rerun `train`");
  }
  return model;
}

struct LoadedIndex {
  EmbeddingStore store;
  AnnIndex index;
};

LoadedIndex checked_index(const PipelineConfig& c) {
  const auto embed = Manifest::load(c.artifact(kEmbedManifest));
  embed.verify(c.artifact(kEmbedManifest), "output.embeddings", c.artifact("embeddings.bin"));
  const auto index_manifest = Manifest::load(c.artifact(kIndexManifest));
  index_manifest.verify(c.artifact(kIndexManifest), "output.index", c.artifact("index.bin"));
  index_manifest.verify(c.artifact(kIndexManifest), "input.embeddings", c.artifact("embeddings.bin"));
  LoadedIndex out{load_store(c.artifact("embeddings.bin")), AnnIndex::load(c.artifact("index.bin"))};
  if (out.index.store_fingerprint() != store_fingerprint(out.store)) {
    throw StaleArtifactError("index.bin was built from a different embedding store; rerun `index`");
  }
  return out;
}

}  // namespace

fs::path PipelineConfig::catalog_path() const { return or_default(catalog, workspace, "catalog.jsonl"); }
fs::path PipelineConfig::pairs_path() const { return or_default(pairs, workspace, "pairs.csv"); }
fs::path PipelineConfig::sessions_path() const { return or_default(sessions, workspace, "sessions.csv"); }
fs::path PipelineConfig::attributes_path() const { return or_default(attributes, workspace, "attributes.csv"); }
fs::path PipelineConfig::schema_path() const { return or_default(schema, workspace, "schema.csv"); }

const std::string& Manifest::get(const fs::path& source, const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw DataError(source.string() + ": missing key " + key);
  return it->second;
}

void Manifest::save(const fs::path& path) const {
  auto out = io::open_output(path);
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

Manifest Manifest::load(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFileError(path.string() + " (has the producing stage been run?)");
  auto in = io::open_input(path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    m.entries_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void Manifest::record(const std::string& key, const fs::path& file) { set(key, sha256_file(file)); }

void Manifest::verify(const fs::path& manifest_path, const std::string& key, const fs::path& file) const {
  if (!fs::exists(file)) throw MissingFileError(file.string());
  if (sha256_file(file) != get(manifest_path, key)) {
    throw StaleArtifactError(file.string() + " changed since " + manifest_path.filename().string() +
                             " was written; rerun the upstream stages");
  }
}

std::string run_synth(const PipelineConfig& c) {
  ensure_workspace(c);
  SynthOptions o;
  o.families = c.families;
  o.products_per_family = c.products_per_family;
  o.sessions = c.synth_sessions;
  o.no_attribute_fraction = c.no_attribute_fraction;
  o.uncompared_fraction = c.uncompared_fraction;
  o.seed = c.seed;
  const auto data = generate_synth(o);
  const SynthPaths paths{c.catalog_path(), c.pairs_path(), c.sessions_path(),
                         c.attributes_path(), c.schema_path(), c.artifact("families.csv")};
  write_synth(data, paths);
  Manifest m;
  m.record("output.catalog", paths.catalog);
  m.record("output.pairs", paths.pairs);
  m.record("output.sessions", paths.sessions);
  m.record("output.attributes", paths.attributes);
  m.record("output.schema", paths.schema);
  m.record("output.families", paths.families);
  m.set("seed", std::to_string(c.seed));
  m.save(c.artifact(kSynthManifest));
  std::ostringstream s;
  s << "synth: " << data.products.size() << " products in " << c.families << " families, "
    << data.pair_lines.size() << " co-compare lines, " << data.sessions.size() << " sessions -> "
    << c.workspace.string();
  return s.str();
}

std::string run_sample(const PipelineConfig& c) {
  ensure_workspace(c);
  const auto products = read_catalog(c);
  std::set<std::string> known;
  for (const auto& p : products) known.insert(p.product_id);
  std::vector<ComparePair> pairs;
  std::size_t unknown = 0;
  for (auto& p : load_pairs(c.pairs_path())) {
    if (known.contains(p.product_id_1) && known.contains(p.product_id_2)) {
      pairs.push_back(std::move(p));
    } else {
      ++unknown;
    }
  }
  if (unknown > 0) spdlog::warn("{} pairs reference products missing from the catalog; dropped", unknown);

  const auto vocab = build_vocabulary(products, c.min_count);
  vocab.save(c.artifact("vocab.txt"));
  const auto components = connected_components(pairs);
  const auto triples = sample_triples(components, {c.neg_ratio, c.positives_per_anchor, c.seed});
  const auto split = split_train_validation(triples, c.val_fraction, c.seed);
  save_triples(c.artifact("train.csv"), split.train);
  save_triples(c.artifact("validation.csv"), split.validation);

  Manifest m;
  m.record("input.catalog", c.catalog_path());
  m.record("input.pairs", c.pairs_path());
  m.record("output.vocab", c.artifact("vocab.txt"));
  m.record("output.train", c.artifact("train.csv"));
  m.record("output.validation", c.artifact("validation.csv"));
  m.set("neg_ratio", std::to_string(c.neg_ratio));
  m.set("seed", std::to_string(c.seed));
  m.save(c.artifact(kSampleManifest));
  std::ostringstream s;
  s << "sample: " << products.size() << " products, " << pairs.size() << " pairs, "
    << components.components.size() << " components, vocabulary " << vocab.size() << ", triples "
    << split.train.size() << " train / " << split.validation.size() << " validation";
  return s.str();
}

std::string run_train(const PipelineConfig& c) {
  const auto sample = Manifest::load(c.artifact(kSampleManifest));
  verify_sample_inputs(c, sample, false);
  sample.verify(c.artifact(kSampleManifest), "output.train", c.artifact("train.csv"));
  sample.verify(c.artifact(kSampleManifest), "output.validation", c.artifact("validation.csv"));

  const auto vocab = Vocabulary::load(c.artifact("vocab.txt"));
  CatalogIndex catalog;
  for (auto& e : encode_catalog(read_catalog(c), vocab, lengths(c))) catalog.emplace(e.product_id, std::move(e));
  const auto train_triples = load_triples(c.artifact("train.csv"));
  const auto val_triples = load_triples(c.artifact("validation.csv"));

  auto model = init_model(vocab.size(), c.embed_dim, c.hidden_dim, c.seed);
  model.vocab_fingerprint = vocab.fingerprint();
  TrainConfig tc;
  tc.batch_size = c.batch_size;
  tc.max_epochs = c.max_epochs;
  tc.patience = c.patience;
  tc.seed = c.seed;
  tc.loss_kind = parse_loss_kind(c.loss);
  tc.learning_rate = c.learning_rate;
  tc.decay_rho = c.rho;
  tc.epsilon = c.epsilon;
  tc.threads = c.threads;
  const auto result = train(std::move(model), train_triples, val_triples, catalog, tc, [](const EpochRecord& r) {
    spdlog::info("epoch {:3d}  train {:.6f}  validation {:.6f}", r.epoch, r.train_loss, r.val_loss);
  });
  save_checkpoint(c.artifact("model.ckpt"), result.model);
  {
    auto out = io::open_output(c.artifact("history.csv"));
    out << "epoch,train_loss,val_loss\n";
    out << "0,," << io::format_double(result.initial_val_loss) << '\n';
    for (const auto& r : result.history) {
      out << r.epoch << ',' << io::format_double(r.train_loss) << ',' << io::format_double(r.val_loss) << '\n';
    }
  }
  Manifest m;
  m.record("input.vocab", c.artifact("vocab.txt"));
  m.record("input.train", c.artifact("train.csv"));
  m.record("input.validation", c.artifact("validation.csv"));
  m.record("output.model", c.artifact("model.ckpt"));
  m.record("output.history", c.artifact("history.csv"));
  m.set("best_epoch", std::to_string(result.best_epoch));
  m.set("loss", std::string(to_string(tc.loss_kind)));
  m.save(c.artifact(kTrainManifest));
  std::ostringstream s;
  s << "train: " << result.history.size() << " epochs, best epoch " << result.best_epoch << ", validation loss "
    << io::format_double(result.initial_val_loss) << " -> "
    << io::format_double(result.history[static_cast<std::size_t>(result.best_epoch - 1)].val_loss);
  return s.str();
}

std::string run_embed(const PipelineConfig& c, bool text_export) {
  const auto sample = Manifest::load(c.artifact(kSampleManifest));
  verify_sample_inputs(c, sample, false);
  const auto vocab = Vocabulary::load(c.artifact("vocab.txt"));
  const auto model = checked_model(c, vocab);
  const auto encoded = encode_catalog(read_catalog(c), vocab, lengths(c));
  GenerateOptions options;
  options.threads = c.threads;
  options.model_fingerprint = sha256_file(c.artifact("model.ckpt"));
  options.progress_every = 2000;
  options.on_progress = [](std::size_t done, std::size_t total) {
    spdlog::info("embedded {}/{}", std::min(done, total), total);
  };
  const auto store = generate_embeddings(export_encoder(model), encoded, options);
  save_store(c.artifact("embeddings.bin"), store);
  if (text_export) export_store_text(c.artifact("embeddings.txt"), store);
  Manifest m;
  m.record("input.model", c.artifact("model.ckpt"));
  m.record("output.embeddings", c.artifact("embeddings.bin"));
  m.save(c.artifact(kEmbedManifest));
  return "embed: " + std::to_string(store.size()) + " embeddings of dimension " + std::to_string(store.dim);
}

std::string run_index(const PipelineConfig& c) {
  const auto train_manifest = Manifest::load(c.artifact(kTrainManifest));
  const auto embed = Manifest::load(c.artifact(kEmbedManifest));
  embed.verify(c.artifact(kEmbedManifest), "output.embeddings", c.artifact("embeddings.bin"));
  embed.verify(c.artifact(kEmbedManifest), "input.model", c.artifact("model.ckpt"));
  const auto store = load_store(c.artifact("embeddings.bin"),
                                train_manifest.get(c.artifact(kTrainManifest), "output.model"));
  const auto index = AnnIndex::build(store, {c.m, c.ef_construction, c.seed});
  index.save(c.artifact("index.bin"));
  Manifest m;
  m.record("input.embeddings", c.artifact("embeddings.bin"));
  m.record("output.index", c.artifact("index.bin"));
  m.save(c.artifact(kIndexManifest));
  return "index: " + std::to_string(index.size()) + " nodes, " + std::to_string(index.max_level() + 1) +
         " layers, " + std::to_string(index.repaired_links()) + " reachability links added";
}

std::string run_recommend(const PipelineConfig& c, const std::optional<std::string>& anchor, std::ostream& out) {
  const auto loaded = checked_index(c);
  const RecommendOptions options{c.n, c.threshold, c.ef_search};
  if (anchor) {
    const auto recs = top_n_recommendations(loaded.index, loaded.store, *anchor, options);
    for (const auto& r : recs) {
      out << r.anchor_id << ',' << r.neighbor_id << ',' << r.rank << ',' << io::format_double(r.similarity) << '\n';
    }
    return "recommend: " + std::to_string(recs.size()) + " alternatives for " + *anchor;
  }
  std::vector<Recommendation> all;
  std::size_t covered = 0;
  for (const auto& [id, vec] : loaded.store.entries) {
    auto recs = top_n_recommendations(loaded.index, loaded.store, id, options);
    covered += !recs.empty();
    all.insert(all.end(), recs.begin(), recs.end());
  }
  save_recommendations(c.artifact("recommendations.csv"), all);
  Manifest m;
  m.record("input.index", c.artifact("index.bin"));
  m.record("output.recommendations", c.artifact("recommendations.csv"));
  m.save(c.artifact(kRecommendManifest));
  return "recommend: " + std::to_string(all.size()) + " recommendations, " + std::to_string(covered) + " of " +
         std::to_string(loaded.store.size()) + " anchors covered";
}

std::string run_evaluate(const PipelineConfig& c) {
  const auto sample = Manifest::load(c.artifact(kSampleManifest));
  verify_sample_inputs(c, sample, true);
  const auto loaded = checked_index(c);

  std::vector<std::string> catalog_ids;
  for (const auto& p : read_catalog(c)) catalog_ids.push_back(p.product_id);
  const auto schema = AttributeSchema::load(c.schema_path());
  const auto vectors = build_attribute_vectors(catalog_ids, load_attributes(c.attributes_path()), schema);
  const AttributeRecommender attribute(vectors.vectors);
  const FrequentlyComparedRecommender frequent(build_cocompare_counts(c.pairs_path()));
  const EmbeddingRecommender deep(loaded.index, loaded.store, c.threshold, c.ef_search);
  const std::vector<NamedRecommender> all{
      {"Attribute Based", &attribute}, {"Frequently Compared", &frequent}, {"Deep Learning Based", &deep}};
  const std::vector<NamedRecommender> baselines{all[0], all[1]};

  const auto sessions = load_sessions(c.sessions_path());
  const auto raw = evaluate(all, sessions);
  const auto filtered_sessions = filter_covered_sessions(sessions, baselines);

  std::string text = render_metrics_text(raw, "Precision and Recall with Raw Sessions");
  {
    auto out = io::open_output(c.artifact("metrics_raw.csv"));
    out << render_metrics_csv(raw);
  }
  if (!filtered_sessions.empty()) {
    const auto filtered = evaluate(all, filtered_sessions);
    text += "\n" + render_metrics_text(filtered, "Precision and Recall with Filtered Sessions");
    auto out = io::open_output(c.artifact("metrics_filtered.csv"));
    out << render_metrics_csv(filtered);
  } else {
    spdlog::warn("no session is covered by both baselines; filtered protocol skipped");
    auto out = io::open_output(c.artifact("metrics_filtered.csv"));
    out << "algorithm\n";
  }

  std::map<std::string, double> coverage;
  for (const auto& r : all) coverage[r.name] = anchor_coverage(*r.recommender, catalog_ids);
  std::ostringstream cov_csv, cov_text;
  cov_csv << "algorithm,anchor_coverage\n";
  cov_text << "\nAnchor coverage (" << catalog_ids.size() << " products)\n";
  for (const auto& r : all) {
    cov_csv << r.name << ',' << io::format_double(coverage[r.name]) << '\n';
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-20s %7.2f%%\n", r.name.c_str(), 100.0 * coverage[r.name]);
    cov_text << buf;
  }
  const auto deep_cov = coverage["Deep Learning Based"];
  for (const auto* base : {"Attribute Based", "Frequently Compared"}) {
    if (coverage[base] == 0.0) continue;
    const auto lift = relative_lift(deep_cov, coverage[base]);
    cov_csv << "lift_vs_" << (base[0] == 'A' ? "attribute_based" : "frequently_compared") << ','
            << io::format_double(lift) << '\n';
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  lift vs %-19s %+7.2f%%\n", base, 100.0 * lift);
    cov_text << buf;
  }
  text += cov_text.str();
  {
    auto out = io::open_output(c.artifact("coverage.csv"));
    out << cov_csv.str();
  }
  {
    auto out = io::open_output(c.artifact("metrics.txt"));
    out << text;
  }
  Manifest m;
  m.record("input.index", c.artifact("index.bin"));
  m.record("input.sessions", c.sessions_path());
  m.record("output.metrics_raw", c.artifact("metrics_raw.csv"));
  m.record("output.metrics_filtered", c.artifact("metrics_filtered.csv"));
  m.record("output.coverage", c.artifact("coverage.csv"));
  m.save(c.artifact(kEvaluateManifest));
  std::ostringstream s;
  s << "evaluate: " << sessions.size() << " sessions (" << filtered_sessions.size()
    << " covered by both baselines); coverage deep " << deep_cov;
  return s.str();
}

}  // namespace altrec
