#include "otml/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace otml {

namespace {

constexpr double kNormGuard = 1e-12;

void fill_uniform(Rng& rng, double scale, Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.uniform();
}

void fill_uniform(Rng& rng, double scale, Vector& v) {
  for (Index i = 0; i < v.size(); ++i) v(i) = scale * rng.uniform();
}

}  // namespace

EmbeddingModel init_model(const ModelConfig& cfg) {
  if (cfg.input_dim < 1) fail_arg("model input_dim must be positive");
  if (cfg.embedding_dim < 1) fail_arg("model embedding_dim must be positive");
  if (cfg.hidden_dim < 0) fail_arg("model hidden_dim must be non-negative");

  EmbeddingModel model;
  model.two_layer = cfg.hidden_dim > 0;
  Rng rng(cfg.seed);
  if (model.two_layer) {
    const double s1 = 1.0 / std::sqrt(double(cfg.input_dim));
    const double s2 = 1.0 / std::sqrt(double(cfg.hidden_dim));
    model.w1.resize(cfg.hidden_dim, cfg.input_dim);
    model.b1.resize(cfg.hidden_dim);
    model.w2.resize(cfg.embedding_dim, cfg.hidden_dim);
    model.b2.resize(cfg.embedding_dim);
    fill_uniform(rng, s1, model.w1);
    fill_uniform(rng, s1, model.b1);
    fill_uniform(rng, s2, model.w2);
    fill_uniform(rng, s2, model.b2);
  } else {
    const double s = 1.0 / std::sqrt(double(cfg.input_dim));
    model.w2.resize(cfg.embedding_dim, cfg.input_dim);
    model.b2.resize(cfg.embedding_dim);
    fill_uniform(rng, s, model.w2);
    fill_uniform(rng, s, model.b2);
  }
  return model;
}

EmbeddingBatch model_forward(const EmbeddingModel& model, const Matrix& features,
                             const std::vector<int>& labels, int num_classes,
                             ForwardCache* cache) {
  if (features.rows() != Index(labels.size()))
    fail_arg("forward: feature rows and label count differ");
  if (features.cols() != model.input_dim())
    fail_arg("forward: feature dim " + std::to_string(features.cols()) +
             " does not match model input dim " + std::to_string(model.input_dim()));

  Matrix pre;
  Matrix hidden_pre, hidden;
  if (model.two_layer) {
    hidden_pre = features * model.w1.transpose();
    hidden_pre.rowwise() += model.b1.transpose();
    hidden = hidden_pre.cwiseMax(0.0);
    pre = hidden * model.w2.transpose();
  } else {
    pre = features * model.w2.transpose();
  }
  pre.rowwise() += model.b2.transpose();
  if (!pre.allFinite()) fail_num("forward produced non-finite activations");

  Matrix z(pre.rows(), pre.cols());
  for (Index i = 0; i < pre.rows(); ++i) {
    const double n = pre.row(i).norm();
    z.row(i) = pre.row(i) / (n + kNormGuard);
  }

  if (cache) {
    cache->inputs = features;
    cache->hidden_pre = hidden_pre;
    cache->hidden = hidden;
    cache->pre_norm = pre;
  }

  EmbeddingBatch batch;
  batch.vectors = std::move(z);
  batch.labels = labels;
  batch.num_classes = num_classes;
  return batch;
}

ParamGrads model_backward(const EmbeddingModel& model, const ForwardCache& cache,
                          const Matrix& grad_embeddings) {
  if (grad_embeddings.rows() != cache.pre_norm.rows() ||
      grad_embeddings.cols() != cache.pre_norm.cols())
    fail_arg("backward: gradient shape does not match the cached forward pass");

  // Through z = a / (|a| + g): da = dz/(n+g) - a (dz.a)/(n (n+g)^2); at a=0
  // the map is linear with slope 1/g.
  Matrix grad_pre(grad_embeddings.rows(), grad_embeddings.cols());
  for (Index i = 0; i < grad_pre.rows(); ++i) {
    const auto a = cache.pre_norm.row(i);
    const auto g = grad_embeddings.row(i);
    const double n = a.norm();
    if (n == 0.0) {
      grad_pre.row(i) = g / kNormGuard;
    } else {
      const double np = n + kNormGuard;
      grad_pre.row(i) = g / np - a * (g.dot(a) / (n * np * np));
    }
  }

  ParamGrads grads;
  grads.b2 = grad_pre.colwise().sum().transpose();
  if (model.two_layer) {
    grads.w2 = grad_pre.transpose() * cache.hidden;
    Matrix grad_hidden = grad_pre * model.w2;
    Matrix mask = (cache.hidden_pre.array() > 0.0).cast<double>();
    Matrix grad_hidden_pre = grad_hidden.cwiseProduct(mask);
    grads.w1 = grad_hidden_pre.transpose() * cache.inputs;
    grads.b1 = grad_hidden_pre.colwise().sum().transpose();
  } else {
    grads.w2 = grad_pre.transpose() * cache.inputs;
  }
  return grads;
}

double lr_at_epoch(const OptimizerConfig& cfg, int epoch) {
  if (cfg.decay_every < 1) fail_arg("decay_every must be at least 1");
  return cfg.learning_rate * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

Optimizer::Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {
  if (!(cfg.learning_rate >= 0.0)) fail_arg("learning_rate must be non-negative");
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor <= 1.0))
    fail_arg("decay_factor must lie in (0,1]");
  if (cfg.decay_every < 1) fail_arg("decay_every must be at least 1");
  if (cfg.epochs < 0) fail_arg("epochs must be non-negative");
}

void Optimizer::begin_step() { ++step_; }

void Optimizer::apply(double lr, Eigen::Ref<Matrix> param, const Matrix& grad,
                      std::size_t slot) {
  if (slots_.size() <= slot) slots_.resize(slot + 1);
  TensorState& s = slots_[slot];
  if (s.m.size() == 0) {
    s.m = Matrix::Zero(param.rows(), param.cols());
    s.v = Matrix::Zero(param.rows(), param.cols());
  }
  if (cfg_.kind == OptKind::SGDMomentum) {
    s.m = cfg_.momentum * s.m + grad;
    param -= lr * s.m;
  } else {
    s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * grad;
    s.v = cfg_.beta2 * s.v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    param.array() -=
        lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + cfg_.adam_eps);
  }
}

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<Index>& rows) {
  Matrix out(Index(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Index(i)) = src.row(rows[i]);
  return out;
}

}  // namespace

TrainResult train(const Dataset& trainset, const ModelConfig& model_cfg,
                  const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg,
                  const NoiseSpec& noise, int batch_size, int r) {
  if (trainset.size() == 0) fail_arg("training set is empty");
  ModelConfig mc = model_cfg;
  if (mc.input_dim == 0) mc.input_dim = int(trainset.dim());
  if (mc.input_dim != trainset.dim())
    fail_arg("model input dim does not match the dataset feature dim");
  if (opt_cfg.xent_warmup_epochs < 0) fail_arg("xent_warmup_epochs must be non-negative");

  TrainResult result;
  NoiseResult nr = inject_noise(trainset.labels, noise, trainset.num_classes);
  result.noisy_labels = nr.labels;
  result.corruption_mask = nr.corruption_mask;

  Dataset working = trainset;
  working.labels = nr.labels;

  result.model = init_model(mc);
  const bool warmup = opt_cfg.xent_warmup_epochs > 0;
  const bool need_classifier = loss_cfg.use_xent || warmup;
  if (need_classifier) {
    result.classifier.weights = Matrix::Zero(trainset.num_classes, mc.embedding_dim);
    result.classifier.bias = Vector::Zero(trainset.num_classes);
  }

  LossConfig warm_cfg = loss_cfg;
  warm_cfg.local = LocalLoss::None;
  warm_cfg.discrepancy.reset();
  warm_cfg.use_xent = true;

  Optimizer opt(opt_cfg);
  for (int epoch = 0; epoch < opt_cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(opt_cfg, epoch);
    const LossConfig& cfg =
        (epoch < opt_cfg.xent_warmup_epochs) ? warm_cfg : loss_cfg;
    const bool xent_active = cfg.use_xent;

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;

    const auto batches = balanced_batches(working, batch_size, r, opt_cfg.seed, epoch);
    for (const auto& rows : batches) {
      if (!result.model.w2.allFinite() || !result.model.b2.allFinite() ||
          (result.model.two_layer &&
           (!result.model.w1.allFinite() || !result.model.b1.allFinite())))
        fail_num("training diverged at epoch " + std::to_string(epoch));

      Matrix xb = gather_rows(working.features, rows);
      std::vector<int> lb(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) lb[i] = working.labels[rows[i]];

      ForwardCache cache;
      EmbeddingBatch zb =
          model_forward(result.model, xb, lb, working.num_classes, &cache);

      Matrix grad_w;
      Vector grad_b;
      LossValue lv = train_loss(zb, cfg, need_classifier ? &result.classifier : nullptr,
                                xent_active ? &grad_w : nullptr,
                                xent_active ? &grad_b : nullptr);
      if (!std::isfinite(lv.total))
        fail_num("training diverged at epoch " + std::to_string(epoch));

      ParamGrads pg = model_backward(result.model, cache, lv.gradient);

      opt.begin_step();
      opt.apply(lr, result.model.w2, pg.w2, 0);
      opt.apply(lr, result.model.b2, pg.b2, 1);
      if (result.model.two_layer) {
        opt.apply(lr, result.model.w1, pg.w1, 2);
        opt.apply(lr, result.model.b1, pg.b1, 3);
      }
      if (xent_active) {
        opt.apply(lr, result.classifier.weights, grad_w, 4);
        opt.apply(lr, result.classifier.bias, grad_b, 5);
      }

      log.total += lv.total;
      log.local_part += lv.local_part;
      log.phi_part += lv.phi_part;
      log.xent_part += lv.xent_part;
    }

    const double inv = batches.empty() ? 0.0 : 1.0 / double(batches.size());
    log.total *= inv;
    log.local_part *= inv;
    log.phi_part *= inv;
    log.xent_part *= inv;
    result.log.push_back(log);
  }
  return result;
}

namespace {

void write_matrix(std::FILE* f, const char* name, const Matrix& m) {
  std::fprintf(f, "%s %ld %ld\n", name, long(m.rows()), long(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j)
      std::fprintf(f, "%s%.17g", j ? " " : "", m(i, j));
    std::fprintf(f, "\n");
  }
}

}  // namespace

void save_checkpoint(const EmbeddingModel& model, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail_arg("cannot open checkpoint file for writing: " + path);
  std::fprintf(f, "embedding-model layers %d\n", model.two_layer ? 2 : 1);
  if (model.two_layer) {
    write_matrix(f, "w1", model.w1);
    write_matrix(f, "b1", model.b1);
  }
  write_matrix(f, "w2", model.w2);
  write_matrix(f, "b2", model.b2);
  std::fclose(f);
}

namespace {

Matrix read_matrix(std::istream& in, const std::string& name) {
  std::string tag;
  long rows = -1, cols = -1;
  if (!(in >> tag >> rows >> cols) || tag != name || rows < 0 || cols < 0)
    fail_arg("checkpoint: malformed header for " + name);
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) fail_arg("checkpoint: truncated values for " + name);
  return m;
}

}  // namespace

EmbeddingModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_arg("cannot open checkpoint file: " + path);
  std::string magic, layers_tag;
  int layers = 0;
  if (!(in >> magic >> layers_tag >> layers) || magic != "embedding-model" ||
      layers_tag != "layers" || (layers != 1 && layers != 2))
    fail_arg("checkpoint: unrecognized header");
  EmbeddingModel model;
  model.two_layer = layers == 2;
  if (model.two_layer) {
    model.w1 = read_matrix(in, "w1");
    model.b1 = read_matrix(in, "b1").col(0);
  }
  model.w2 = read_matrix(in, "w2");
  model.b2 = read_matrix(in, "b2").col(0);
  if (model.two_layer && model.w2.cols() != model.w1.rows())
    fail_arg("checkpoint: layer shapes are inconsistent");
  if (model.b2.size() != model.w2.rows() ||
      (model.two_layer && model.b1.size() != model.w1.rows()))
    fail_arg("checkpoint: bias shapes are inconsistent");
  return model;
}

}  // namespace otml
