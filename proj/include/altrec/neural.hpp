#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "altrec/catalog.hpp"
#include "altrec/compare_graph.hpp"
#include "altrec/tensor.hpp"

namespace altrec {

// Gate blocks are stacked in the order input, forget, cell, output.
struct LstmParams {
  Tensor w_input;      // (4h, embed_dim)
  Tensor w_recurrent;  // (4h, h)
  Tensor bias;         // (4h)

  std::size_t hidden_dim() const noexcept { return w_recurrent.cols(); }
  std::size_t input_dim() const noexcept { return w_input.cols(); }
  bool operator==(const LstmParams&) const = default;
};

struct BiLstmLayer {
  LstmParams forward;
  LstmParams backward;

  std::size_t hidden_dim() const noexcept { return forward.hidden_dim(); }
  bool operator==(const BiLstmLayer&) const = default;
};

// Every trainable tensor of the Siamese network. Also used, zero-filled, as the
// container for gradients and optimizer accumulators.
struct ModelParameters {
  Tensor embedding;  // (vocab_size, embed_dim); row 0 is PAD
  BiLstmLayer title;
  BiLstmLayer description;
  Tensor bce_affine;  // {scale, offset}; only used by the cross-entropy loss

  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  ModelParameters zeros_like() const;
  bool operator==(const ModelParameters&) const = default;

 private:
  template <typename Self, typename F>
  static void visit(Self& p, F& f) {
    f(std::string_view("embedding"), p.embedding);
    visit_lstm("title.forward", p.title.forward, f);
    visit_lstm("title.backward", p.title.backward, f);
    visit_lstm("description.forward", p.description.forward, f);
    visit_lstm("description.backward", p.description.backward, f);
    f(std::string_view("bce_affine"), p.bce_affine);
  }
  template <typename L, typename F>
  static void visit_lstm(const std::string& prefix, L& l, F& f) {
    f(std::string_view(prefix + ".w_input"), l.w_input);
    f(std::string_view(prefix + ".w_recurrent"), l.w_recurrent);
    f(std::string_view(prefix + ".bias"), l.bias);
  }
};

using Gradients = ModelParameters;

/// The learned projection: one embedding table shared by a title BiLSTM and a
/// description BiLSTM. Both Siamese branches evaluate this same object.
struct SiameseModel {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
  std::string vocab_fingerprint;
  ModelParameters params;

  std::size_t output_dim() const noexcept { return 4 * hidden_dim; }
  bool operator==(const SiameseModel&) const = default;
};

/// Glorot-uniform weights, forget-gate bias 1, other biases 0, zero PAD row.
SiameseModel init_model(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim,
                        std::uint64_t seed);

/// Runs the forward LSTM over tokens[0, len) and the backward LSTM over
/// tokens[len-1 .. 0] and returns [h_forward_final, h_backward_final].
/// Throws DataError when len is 0.
std::vector<double> bilstm_encode(std::span<const std::int32_t> tokens, std::size_t len,
                                  const Tensor& embedding, const BiLstmLayer& layer);

/// [title encoding, description encoding], 4 * hidden_dim wide.
std::vector<double> encode_product(const EncodedProduct& p, const SiameseModel& model);

/// Cosine similarity clamped to [-1, 1]. Throws ZeroNormError.
double cosine_energy(std::span<const double> u, std::span<const double> v);

enum class LossKind { contrastive, binary_cross_entropy };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

/// label 1: |1 - e|. label 0: e when e > 0, else 0.
double contrastive_loss(double energy, int label);

/// Per-instance loss for either loss kind given the cosine energy.
double instance_loss(double energy, int label, LossKind kind, const ModelParameters& params);

struct PairExample {
  const EncodedProduct* anchor;
  const EncodedProduct* other;
  int label;
};

/// Sum of per-instance losses over the batch.
double batch_loss(std::span<const PairExample> batch, const SiameseModel& model, LossKind kind);

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

/// Exact reverse-mode gradients of batch_loss. Throws NumericalError naming
/// the parameter when any gradient entry is not finite. `threads` > 1 splits
/// per-product work across threads with a fixed-order reduction.
LossAndGradients compute_gradients(std::span<const PairExample> batch, const SiameseModel& model,
                                   LossKind kind, unsigned threads = 1);

struct RmsPropState {
  ModelParameters mean_square;
  double learning_rate = 1e-3;
  double decay_rho = 0.9;
  double epsilon = 1e-8;

  static RmsPropState for_model(const ModelParameters& params, double lr = 1e-3, double rho = 0.9,
                                double eps = 1e-8);
};

/// ms <- rho*ms + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(ms)+eps).
void rmsprop_step(ModelParameters& params, const Gradients& grads, RmsPropState& state);

/// Tracks the best validation loss; signals a stop after `patience` epochs
/// without improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);
  /// Records one epoch's validation loss; returns true when training should stop.
  bool update(double val_loss);
  bool improved_last() const noexcept { return improved_last_; }
  int best_epoch() const noexcept { return best_epoch_; }  // 1-based, 0 before any update
  double best_loss() const noexcept { return best_loss_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_loss_ = 0.0;
  bool improved_last_ = false;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  int max_epochs = 50;
  int patience = 3;
  std::uint64_t seed = 7;
  LossKind loss_kind = LossKind::contrastive;
  double learning_rate = 1e-3;
  double decay_rho = 0.9;
  double epsilon = 1e-8;
  unsigned threads = 1;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-instance, accumulated during the epoch
  double val_loss = 0.0;    // mean per-instance, after the epoch
};

struct TrainResult {
  SiameseModel model;  // snapshot with the lowest validation loss
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double initial_val_loss = 0.0;  // before any update
};

using CatalogIndex = std::unordered_map<std::string, EncodedProduct>;

/// Mean per-instance loss of `triples`.
double mean_loss(const std::vector<TrainingTriple>& triples, const CatalogIndex& catalog,
                 const SiameseModel& model, LossKind kind);

TrainResult train(SiameseModel model, const std::vector<TrainingTriple>& train_triples,
                  const std::vector<TrainingTriple>& val_triples, const CatalogIndex& catalog,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Binary checkpoint: magic "ALTRECCK", u32 version, u64 vocab_size,
/// embed_dim, hidden_dim, length-prefixed vocabulary fingerprint, u32 tensor
/// count, then per tensor: name, u32 rank, u64 dims, float64 values.
void save_checkpoint(const std::filesystem::path& path, const SiameseModel& model);
SiameseModel load_checkpoint(const std::filesystem::path& path);

}  // namespace altrec
