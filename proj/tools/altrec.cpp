// altrec: alternative-product recommendation pipeline.
//
//   altrec synth     --workspace ws
//   altrec sample    --workspace ws
//   altrec train     --workspace ws
//   altrec embed     --workspace ws
//   altrec index     --workspace ws
//   altrec recommend --workspace ws [--anchor ID]
//   altrec evaluate  --workspace ws
//
// Options may also come from a flat key=value file given with --config;
// command-line flags take precedence over it.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "altrec/error.hpp"
#include "altrec/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumerical = 4 };

void add_pipeline_options(CLI::App& app, altrec::PipelineConfig& c) {
  app.add_option("--workspace", c.workspace, "Directory holding every pipeline artifact")->capture_default_str();
  app.add_option("--catalog", c.catalog, "Catalog JSON lines (product_id, title, description) [workspace/catalog.jsonl]");
  app.add_option("--pairs", c.pairs, "Co-compare CSV id1,id2,flag [workspace/pairs.csv]");
  app.add_option("--sessions", c.sessions, "Sessions CSV session_id,anchor_id,p1|p2 [workspace/sessions.csv]");
  app.add_option("--attributes", c.attributes, "Attributes CSV product_id,name,value [workspace/attributes.csv]");
  app.add_option("--schema", c.schema, "Attribute schema CSV name,kind,spec [workspace/schema.csv]");

  app.add_option("--min-count", c.min_count, "Minimum token count for the vocabulary")->capture_default_str();
  app.add_option("--title-len", c.title_len, "Title sequence length")->capture_default_str();
  app.add_option("--desc-len", c.desc_len, "Description sequence length")->capture_default_str();
  app.add_option("--neg-ratio", c.neg_ratio, "Negative triples per positive")->capture_default_str();
  app.add_option("--positives-per-anchor", c.positives_per_anchor, "Positive triples per product")->capture_default_str();
  app.add_option("--val-fraction", c.val_fraction, "Validation share of the triples")->capture_default_str();

  app.add_option("--embed-dim", c.embed_dim, "Token embedding width")->capture_default_str();
  app.add_option("--hidden-dim", c.hidden_dim, "LSTM hidden width (product vectors are 4x this)")->capture_default_str();
  app.add_option("--batch-size", c.batch_size, "Triples per mini-batch")->capture_default_str();
  app.add_option("--learning-rate", c.learning_rate, "RMSprop learning rate")->capture_default_str();
  app.add_option("--rho", c.rho, "RMSprop decay")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "RMSprop epsilon")->capture_default_str();
  app.add_option("--max-epochs", c.max_epochs, "Epoch limit")->capture_default_str();
  app.add_option("--patience", c.patience, "Epochs without validation improvement before stopping")->capture_default_str();
  app.add_option("--loss", c.loss, "contrastive or binary_cross_entropy")
      ->check(CLI::IsMember({"contrastive", "binary_cross_entropy", "bce"}))
      ->capture_default_str();

  app.add_option("--m", c.m, "Max graph neighbors per node and layer (2x at the base layer)")->capture_default_str();
  app.add_option("--ef-construction", c.ef_construction, "Candidate list size while building")->capture_default_str();
  app.add_option("--ef-search", c.ef_search, "Candidate list size while querying")->capture_default_str();
  app.add_option("--threshold", c.threshold, "Minimum cosine similarity of a recommendation")->capture_default_str();
  app.add_option("--n", c.n, "Recommendations per anchor")->capture_default_str();

  app.add_option("--families", c.families, "synth: product families")->capture_default_str();
  app.add_option("--products-per-family", c.products_per_family, "synth: products per family")->capture_default_str();
  app.add_option("--synth-sessions", c.synth_sessions, "synth: purchase sessions")->capture_default_str();
  app.add_option("--no-attribute-fraction", c.no_attribute_fraction, "synth: share of products without attributes")
      ->capture_default_str();
  app.add_option("--uncompared-fraction", c.uncompared_fraction, "synth: share of products never co-compared")
      ->capture_default_str();

  app.add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads for training and embedding")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("altrec"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Alternative-product recommendations from co-compare behavior and product text"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file; keys are the long flag names");
  altrec::PipelineConfig config;
  add_pipeline_options(app, config);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Only print warnings and errors");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic catalog, pairs, attributes and sessions");
  auto* sample = app.add_subcommand("sample", "Build the vocabulary and sample training triples");
  auto* train = app.add_subcommand("train", "Train the Siamese BiLSTM and write model.ckpt");
  auto* embed = app.add_subcommand("embed", "Embed the whole catalog into embeddings.bin");
  bool text_export = false;
  embed->add_flag("--text", text_export, "Also write embeddings.txt (id then 17-digit values)");
  auto* index = app.add_subcommand("index", "Build the ANN index over the embeddings");
  auto* recommend = app.add_subcommand("recommend", "Top-n alternatives for one anchor or the whole catalog");
  std::optional<std::string> anchor;
  recommend->add_option("--anchor", anchor, "Print this anchor's alternatives instead of writing the file");
  auto* evaluate = app.add_subcommand("evaluate", "Precision/recall and coverage for all three algorithms");
  for (auto* sub : {synth, sample, train, embed, index, recommend, evaluate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    std::string summary;
    if (*synth) summary = altrec::run_synth(config);
    if (*sample) summary = altrec::run_sample(config);
    if (*train) summary = altrec::run_train(config);
    if (*embed) summary = altrec::run_embed(config, text_export);
    if (*index) summary = altrec::run_index(config);
    if (*recommend) summary = altrec::run_recommend(config, anchor, std::cout);
    if (*evaluate) summary = altrec::run_evaluate(config);
    (anchor ? std::cerr : std::cout) << summary << '\n';
    return kOk;
  } catch (const altrec::UsageError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const altrec::NumericalError& e) {
    spdlog::error("{}", e.what());
    return kNumerical;
  } catch (const altrec::DataError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}
