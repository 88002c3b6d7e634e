#include "otml/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace otml {

namespace {

// Distinct labels present in the batch, ascending.
std::vector<int> present_classes(const EmbeddingBatch& batch) {
  std::vector<int> classes;
  for (int y : batch.labels)
    if (std::find(classes.begin(), classes.end(), y) == classes.end()) classes.push_back(y);
  std::sort(classes.begin(), classes.end());
  return classes;
}

std::vector<Index> rows_of_class(const EmbeddingBatch& batch, int k, bool invert) {
  std::vector<Index> rows;
  for (Index i = 0; i < batch.size(); ++i)
    if ((batch.labels[std::size_t(i)] == k) != invert) rows.push_back(i);
  return rows;
}

Matrix take_rows(const Matrix& src, const std::vector<Index>& rows) {
  Matrix out(Index(rows.size()), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(Index(r)) = src.row(rows[r]);
  return out;
}

using RowVec = Eigen::RowVectorXd;

// d k(u,v) / d u for the pointwise kernels, consistent with kernel_eval
// (including the test perturbation hook). Laplacian contribution is zero
// below 1e-12 separation where its derivative is undefined.
RowVec kernel_grad_u(const DiscrepancyKind& kind, const RowVec& u, const RowVec& v) {
  RowVec diff = u - v;
  double d2 = diff.squaredNorm();
  if (kind.kind == Discrepancy::MMD_Laplacian) {
    double d = std::sqrt(d2);
    if (d < 1e-12) return RowVec::Zero(u.size());
    double k = kernel_eval(kind, u.transpose(), v.transpose());
    return diff * (-k / (kind.sigma * d));
  }
  double k = kernel_eval(kind, u.transpose(), v.transpose());
  return diff * (-k / (kind.sigma * kind.sigma));
}

// Gradients of mmd(P, N) with respect to both point sets (uniform averaging).
void mmd_grads(const DiscrepancyKind& kind, const Matrix& P, const Matrix& N, Matrix& gP,
               Matrix& gN) {
  const Index n = P.rows(), m = N.rows();
  gP = Matrix::Zero(n, P.cols());
  gN = Matrix::Zero(m, N.cols());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      RowVec g = kernel_grad_u(kind, P.row(i), P.row(j)) / double(n * n);
      gP.row(i) += g;
      gP.row(j) -= g;
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      RowVec g = kernel_grad_u(kind, P.row(i), N.row(j)) * (-2.0 / double(n * m));
      gP.row(i) += g;
      gN.row(j) -= g;
    }
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      RowVec g = kernel_grad_u(kind, N.row(i), N.row(j)) / double(m * m);
      gN.row(i) += g;
      gN.row(j) -= g;
    }
}

struct PairingInfo {
  std::vector<Index> positive;                // per row: designated positive row
  std::vector<std::vector<Index>> negatives;  // per row: other-class rows
};

// Cyclic next-same-class positives; reduces to "the other row" at 2/class.
PairingInfo build_pairing(const EmbeddingBatch& batch) {
  PairingInfo info;
  info.positive.assign(std::size_t(batch.size()), -1);
  info.negatives.resize(std::size_t(batch.size()));
  for (int k : present_classes(batch)) {
    std::vector<Index> rows = rows_of_class(batch, k, false);
    if (rows.size() < 2)
      fail_arg("pair loss: class " + std::to_string(k) + " has no positive partner");
    for (std::size_t r = 0; r < rows.size(); ++r)
      info.positive[std::size_t(rows[r])] = rows[(r + 1) % rows.size()];
  }
  for (Index a = 0; a < batch.size(); ++a) {
    info.negatives[std::size_t(a)] = rows_of_class(batch, batch.labels[std::size_t(a)], true);
    if (info.negatives[std::size_t(a)].empty()) fail_arg("pair loss: no negatives in batch");
  }
  return info;
}

// Shared softplus-of-logits machinery for npairs and angular: value
// log(1 + sum exp(f_n)) and weights exp(f_n) / (1 + sum exp(f_m)), computed
// against the running max for overflow safety.
double stable_log1p_exp_sum(const std::vector<double>& f, std::vector<double>& w) {
  double mx = 0.0;  // the implicit 1 contributes exponent 0
  for (double x : f) mx = std::max(mx, x);
  double denom = std::exp(-mx);
  for (double x : f) denom += std::exp(x - mx);
  w.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) w[i] = std::exp(f[i] - mx) / denom;
  return mx + std::log(denom);
}

}  // namespace

std::pair<DiscreteDistribution, DiscreteDistribution> group_classwise(const EmbeddingBatch& batch,
                                                                      int k) {
  std::vector<Index> pos = rows_of_class(batch, k, false);
  std::vector<Index> neg = rows_of_class(batch, k, true);
  if (pos.empty()) fail_arg("group_classwise: class " + std::to_string(k) + " absent from batch");
  if (neg.empty()) fail_arg("group_classwise: batch has a single class, negative set empty");
  return {make_distribution(take_rows(batch.vectors, pos)),
          make_distribution(take_rows(batch.vectors, neg))};
}

ValueGrad dcdl_loss(const EmbeddingBatch& batch, const DiscrepancyKind& kind) {
  std::vector<int> classes = present_classes(batch);
  if (classes.size() < 2) fail_arg("dcdl_loss: at least two classes required");
  ValueGrad out;
  out.gradient = Matrix::Zero(batch.size(), batch.dim());
  for (int k : classes) {
    std::vector<Index> pos = rows_of_class(batch, k, false);
    std::vector<Index> neg = rows_of_class(batch, k, true);
    Matrix P = take_rows(batch.vectors, pos);
    Matrix N = take_rows(batch.vectors, neg);
    DiscreteDistribution dp = make_distribution(P);
    DiscreteDistribution dn = make_distribution(N);
    if (kind.kind == Discrepancy::Wasserstein) {
      CostMatrix c = pairwise_cost(dp, dn, 2.0, 0.5);
      TransportPlan plan = sinkhorn(dp, dn, c, kind.sinkhorn);
      out.value -= transport_cost(plan, c);
      // Fixed-plan gradient of sum_ij T_ij * (1/2)|P_i - N_j|^2.
      Vector row_sum = plan.coupling.rowwise().sum();
      Vector col_sum = plan.coupling.colwise().sum();
      Matrix gP = row_sum.asDiagonal() * P - plan.coupling * N;
      Matrix gN = col_sum.asDiagonal() * N - plan.coupling.transpose() * P;
      for (std::size_t r = 0; r < pos.size(); ++r) out.gradient.row(pos[r]) -= gP.row(Index(r));
      for (std::size_t r = 0; r < neg.size(); ++r) out.gradient.row(neg[r]) -= gN.row(Index(r));
    } else {
      out.value -= mmd(dp, dn, kind);
      Matrix gP, gN;
      mmd_grads(kind, P, N, gP, gN);
      for (std::size_t r = 0; r < pos.size(); ++r) out.gradient.row(pos[r]) -= gP.row(Index(r));
      for (std::size_t r = 0; r < neg.size(); ++r) out.gradient.row(neg[r]) -= gN.row(Index(r));
    }
  }
  return out;
}

ValueGrad triplet_loss(const EmbeddingBatch& batch, double tau) {
  if (!(tau > 0.0)) fail_arg("triplet_loss: margin must be positive");
  const Matrix& Z = batch.vectors;
  Matrix d2 = pairwise_sq_dist(Z, Z);
  ValueGrad out;
  out.gradient = Matrix::Zero(batch.size(), batch.dim());
  long count = 0;
  double sum = 0.0;
  struct Active {
    Index a, p, n;
  };
  std::vector<Active> active;
  for (Index a = 0; a < batch.size(); ++a) {
    int ya = batch.labels[std::size_t(a)];
    for (Index p = 0; p < batch.size(); ++p) {
      if (p == a || batch.labels[std::size_t(p)] != ya) continue;
      double dap = d2(a, p);
      Index best_semi = -1, best_any = -1;
      for (Index n = 0; n < batch.size(); ++n) {
        if (batch.labels[std::size_t(n)] == ya) continue;
        double dan = d2(a, n);
        if (best_any < 0 || dan < d2(a, best_any)) best_any = n;
        if (dan > dap && (best_semi < 0 || dan < d2(a, best_semi))) best_semi = n;
      }
      if (best_any < 0) continue;  // no negatives at all
      Index neg = best_semi >= 0 ? best_semi : best_any;
      ++count;
      double hinge = dap - d2(a, neg) + tau;
      if (hinge > 0.0) {
        sum += hinge;
        active.push_back({a, p, neg});
      }
    }
  }
  if (count == 0) fail_arg("triplet_loss: no valid triplet in batch");
  out.value = sum / double(count);
  for (const Active& t : active) {
    RowVec ap = (Z.row(t.a) - Z.row(t.p)) * (2.0 / double(count));
    RowVec an = (Z.row(t.a) - Z.row(t.n)) * (2.0 / double(count));
    out.gradient.row(t.a) += ap - an;
    out.gradient.row(t.p) -= ap;
    out.gradient.row(t.n) += an;
  }
  return out;
}

ValueGrad npairs_loss(const EmbeddingBatch& batch) {
  PairingInfo pairing = build_pairing(batch);
  const Matrix& Z = batch.vectors;
  const double inv_n = 1.0 / double(batch.size());
  ValueGrad out;
  out.gradient = Matrix::Zero(batch.size(), batch.dim());
  std::vector<double> f, w;
  for (Index a = 0; a < batch.size(); ++a) {
    Index p = pairing.positive[std::size_t(a)];
    const auto& negs = pairing.negatives[std::size_t(a)];
    double ap = Z.row(a).dot(Z.row(p));
    f.clear();
    for (Index n : negs) f.push_back(Z.row(a).dot(Z.row(n)) - ap);
    out.value += inv_n * stable_log1p_exp_sum(f, w);
    double wsum = 0.0;
    for (std::size_t t = 0; t < negs.size(); ++t) {
      Index n = negs[t];
      out.gradient.row(a) += inv_n * w[t] * (Z.row(n) - Z.row(p));
      out.gradient.row(n) += inv_n * w[t] * Z.row(a);
      wsum += w[t];
    }
    out.gradient.row(p) -= inv_n * wsum * Z.row(a);
  }
  return out;
}

ValueGrad angular_loss(const EmbeddingBatch& batch, double alpha_degrees) {
  double rad = alpha_degrees * 3.14159265358979323846 / 180.0;
  if (std::abs(std::cos(rad)) < 1e-12)
    fail_arg("angular_loss: alpha of 90 degrees makes tan singular");
  double t2 = std::tan(rad) * std::tan(rad);
  PairingInfo pairing = build_pairing(batch);
  const Matrix& Z = batch.vectors;
  const double inv_n = 1.0 / double(batch.size());
  ValueGrad out;
  out.gradient = Matrix::Zero(batch.size(), batch.dim());
  std::vector<double> f, w;
  for (Index a = 0; a < batch.size(); ++a) {
    Index p = pairing.positive[std::size_t(a)];
    const auto& negs = pairing.negatives[std::size_t(a)];
    RowVec apsum = Z.row(a) + Z.row(p);
    double ap = Z.row(a).dot(Z.row(p));
    f.clear();
    for (Index n : negs) f.push_back(4.0 * t2 * apsum.dot(Z.row(n)) - 2.0 * (1.0 + t2) * ap);
    out.value += inv_n * stable_log1p_exp_sum(f, w);
    for (std::size_t t = 0; t < negs.size(); ++t) {
      Index n = negs[t];
      out.gradient.row(a) += inv_n * w[t] * (4.0 * t2 * Z.row(n) - 2.0 * (1.0 + t2) * Z.row(p));
      out.gradient.row(p) += inv_n * w[t] * (4.0 * t2 * Z.row(n) - 2.0 * (1.0 + t2) * Z.row(a));
      out.gradient.row(n) += inv_n * w[t] * 4.0 * t2 * apsum;
    }
  }
  return out;
}

ValueGrad angular_npairs_loss(const EmbeddingBatch& batch, double alpha_degrees,
                              double lambda_ang) {
  ValueGrad np = npairs_loss(batch);
  ValueGrad ang = angular_loss(batch, alpha_degrees);
  np.value += lambda_ang * ang.value;
  np.gradient += lambda_ang * ang.gradient;
  return np;
}

XentResult cross_entropy_loss(const EmbeddingBatch& batch, const Classifier& classifier) {
  const Index num_classes = classifier.weights.rows();
  if (classifier.weights.cols() != batch.dim())
    fail_arg("cross_entropy_loss: classifier width does not match embedding dim");
  if (classifier.bias.size() != num_classes)
    fail_arg("cross_entropy_loss: bias length does not match class count");
  for (int y : batch.labels)
    if (y >= num_classes) fail_arg("cross_entropy_loss: label outside classifier range");

  const Index n = batch.size();
  XentResult out;
  out.grad_embeddings = Matrix::Zero(n, batch.dim());
  out.grad_weights = Matrix::Zero(num_classes, batch.dim());
  out.grad_bias = Vector::Zero(num_classes);
  const double inv_n = 1.0 / double(n);
  Vector logits(num_classes), probs(num_classes);
  for (Index i = 0; i < n; ++i) {
    logits = classifier.weights * batch.vectors.row(i).transpose() + classifier.bias;
    if (!logits.allFinite()) fail_arg("cross_entropy_loss: non-finite logit");
    double mx = logits.maxCoeff();
    double denom = 0.0;
    for (Index k = 0; k < num_classes; ++k) denom += std::exp(logits[k] - mx);
    int y = batch.labels[std::size_t(i)];
    out.value += inv_n * (std::log(denom) - (logits[y] - mx));
    for (Index k = 0; k < num_classes; ++k) probs[k] = std::exp(logits[k] - mx) / denom;
    probs[y] -= 1.0;
    out.grad_embeddings.row(i) = inv_n * (probs.transpose() * classifier.weights);
    out.grad_weights += inv_n * probs * batch.vectors.row(i);
    out.grad_bias += inv_n * probs;
  }
  return out;
}

LossValue train_loss(const EmbeddingBatch& batch, const LossConfig& cfg,
                     const Classifier* classifier, Matrix* grad_weights, Vector* grad_bias) {
  if (cfg.local == LocalLoss::None && !cfg.discrepancy && !cfg.use_xent)
    fail_arg("train_loss: every loss part is switched off");
  if (cfg.use_xent && classifier == nullptr)
    fail_arg("train_loss: cross-entropy requested without a classifier");
  if (cfg.lambda < 0.0 || cfg.lambda_xent < 0.0)
    fail_arg("train_loss: negative loss weight");

  LossValue out;
  out.gradient = Matrix::Zero(batch.size(), batch.dim());

  switch (cfg.local) {
    case LocalLoss::Triplet: {
      ValueGrad v = triplet_loss(batch, cfg.tau);
      out.local_part = v.value;
      out.gradient += v.gradient;
      break;
    }
    case LocalLoss::NPairs: {
      ValueGrad v = npairs_loss(batch);
      out.local_part = v.value;
      out.gradient += v.gradient;
      break;
    }
    case LocalLoss::Angular: {
      ValueGrad v = angular_loss(batch, cfg.alpha_degrees);
      out.local_part = v.value;
      out.gradient += v.gradient;
      break;
    }
    case LocalLoss::AngularNPairs: {
      ValueGrad v = angular_npairs_loss(batch, cfg.alpha_degrees, cfg.lambda_ang);
      out.local_part = v.value;
      out.gradient += v.gradient;
      break;
    }
    case LocalLoss::None:
      break;
  }

  if (cfg.discrepancy) {
    ValueGrad v = dcdl_loss(batch, *cfg.discrepancy);
    out.phi_part = v.value;
    out.gradient += cfg.lambda * v.gradient;
  }

  if (cfg.use_xent) {
    XentResult x = cross_entropy_loss(batch, *classifier);
    out.xent_part = x.value;
    out.gradient += cfg.lambda_xent * x.grad_embeddings;
    if (grad_weights) *grad_weights = cfg.lambda_xent * x.grad_weights;
    if (grad_bias) *grad_bias = cfg.lambda_xent * x.grad_bias;
  }

  out.total = out.local_part + cfg.lambda * out.phi_part + cfg.lambda_xent * out.xent_part;
  return out;
}

}  // namespace otml
