#pragma once

#include "otml/data.hpp"
#include "otml/losses.hpp"

namespace otml {

struct ModelConfig {
  int input_dim = 0;
  int hidden_dim = 32;     // 0 selects the single-layer map
  int embedding_dim = 64;
  std::uint64_t seed = 1;
};

// One or two affine maps with a rectifier between, then row-wise
// L2-normalization guarded by +1e-12 on the norm before dividing.
struct EmbeddingModel {
  bool two_layer = true;
  Matrix w1;  // hidden x input (empty when single layer)
  Vector b1;  // hidden
  Matrix w2;  // embedding x (hidden or input)
  Vector b2;  // embedding

  Index input_dim() const { return two_layer ? w1.cols() : w2.cols(); }
  Index embedding_dim() const { return w2.rows(); }
  long parameter_count() const {
    long n = long(w2.size()) + long(b2.size());
    if (two_layer) n += long(w1.size()) + long(b1.size());
    return n;
  }
};

// Parameters drawn from U[0,1) scaled by 1/sqrt(fan-in), deterministically.
EmbeddingModel init_model(const ModelConfig& cfg);

// Intermediate activations kept for the backward pass.
struct ForwardCache {
  Matrix inputs;      // N x d
  Matrix hidden_pre;  // N x h (two-layer only)
  Matrix hidden;      // N x h, rectified
  Matrix pre_norm;    // N x l, embedding before normalization
};

EmbeddingBatch model_forward(const EmbeddingModel& model, const Matrix& features,
                             const std::vector<int>& labels, int num_classes,
                             ForwardCache* cache = nullptr);

struct ParamGrads {
  Matrix w1, w2;
  Vector b1, b2;
};

// Exact chain rule through the guarded normalization, the affine maps, and
// the rectifier (subgradient 0 at the kink).
ParamGrads model_backward(const EmbeddingModel& model, const ForwardCache& cache,
                          const Matrix& grad_embeddings);

enum class OptKind { SGDMomentum, Adam };

struct OptimizerConfig {
  OptKind kind = OptKind::Adam;
  double learning_rate = 5e-4;
  double momentum = 0.9;
  double beta1 = 0.9, beta2 = 0.999;
  double adam_eps = 1e-8;
  double decay_factor = 0.1;
  int decay_every = 50;  // epochs
  int epochs = 100;
  // Epochs trained on cross entropy alone before the configured loss kicks
  // in; stands in for classification pre-training of a large backbone.
  int xent_warmup_epochs = 0;
  std::uint64_t seed = 1;  // batch-schedule seed
};

// base * decay_factor^floor(epoch / decay_every), epochs counted from 0.
double lr_at_epoch(const OptimizerConfig& cfg, int epoch);

// Stateful updater shared by all tensors of one run. begin_step() advances
// the counter behind the Adam bias correction once per batch; apply() then
// updates one tensor in place. Slots identify tensors across steps.
class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg);
  void begin_step();
  void apply(double lr, Eigen::Ref<Matrix> param, const Matrix& grad, std::size_t slot);

 private:
  struct TensorState {
    Matrix m, v;  // momentum buffer doubles as the Adam first moment
  };
  OptimizerConfig cfg_;
  long step_ = 0;
  std::vector<TensorState> slots_;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0, local_part = 0.0, phi_part = 0.0, xent_part = 0.0;  // batch means
};

struct TrainResult {
  EmbeddingModel model;
  Classifier classifier;  // zero-sized unless the loss uses cross entropy
  std::vector<EpochLog> log;
  std::vector<int> noisy_labels;       // labels actually trained on
  std::vector<char> corruption_mask;
};

// Applies the noise spec once to the training labels, then runs epochs of
// balanced batches. Aborts with the epoch index if the loss turns
// non-finite.
TrainResult train(const Dataset& trainset, const ModelConfig& model_cfg, const LossConfig& loss_cfg,
                  const OptimizerConfig& opt_cfg, const NoiseSpec& noise, int batch_size, int r);

// Line-oriented text checkpoint; round-trips parameters bit-exactly.
void save_checkpoint(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_checkpoint(const std::string& path);

}  // namespace otml
