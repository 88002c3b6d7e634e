#pragma once

#include <optional>
#include <utility>

#include "otml/discrepancy.hpp"

namespace otml {

enum class LocalLoss { Triplet, NPairs, Angular, AngularNPairs, None };

struct LossConfig {
  LocalLoss local = LocalLoss::Triplet;
  std::optional<DiscrepancyKind> discrepancy;  // absent: no class-wise term
  double lambda = 0.2;        // weight of the class-wise discrepancy term
  double lambda_xent = 1.0;   // weight of the cross-entropy term
  double lambda_ang = 2.0;    // angular weight inside AngularNPairs
  double tau = 0.5;           // triplet margin
  double alpha_degrees = 30;  // angular bound
  bool use_xent = false;
};

struct LossValue {
  double total = 0.0;
  double local_part = 0.0;
  double phi_part = 0.0;
  double xent_part = 0.0;
  Matrix gradient;  // d total / d embeddings, N x l
};

struct ValueGrad {
  double value = 0.0;
  Matrix gradient;  // N x l
};

struct Classifier {
  Matrix weights;  // K x l
  Vector bias;     // K
};

struct XentResult {
  double value = 0.0;
  Matrix grad_embeddings;  // N x l
  Matrix grad_weights;     // K x l
  Vector grad_bias;        // K
};

// Splits a batch into (rows of class k, rows of every other class), both as
// uniformly weighted distributions, preserving row order.
std::pair<DiscreteDistribution, DiscreteDistribution> group_classwise(const EmbeddingBatch& batch,
                                                                      int k);

// Negated sum over batch-present classes of the discrepancy between each
// class and the rest. Gradients: kernel derivative sums for the MMD kinds;
// for Wasserstein the solved plan is held fixed (envelope approximation,
// exact only in the small-entropy limit).
ValueGrad dcdl_loss(const EmbeddingBatch& batch, const DiscrepancyKind& kind);

// Mean hinge over ordered same-class (anchor, positive) pairs with a mined
// negative: the closest one (squared distance) farther than the positive,
// falling back to the closest overall. Ties pick the lowest row index.
ValueGrad triplet_loss(const EmbeddingBatch& batch, double tau);

// Mean over anchors of log(1 + sum_neg exp(za.zn - za.zp)); the positive is
// the next same-class row in cyclic order, negatives are all other-class
// rows.
ValueGrad npairs_loss(const EmbeddingBatch& batch);

// Same pairing as npairs with exponent 4 tan^2(alpha) (za+zp).zn
// - 2 (1+tan^2(alpha)) za.zp.
ValueGrad angular_loss(const EmbeddingBatch& batch, double alpha_degrees);

ValueGrad angular_npairs_loss(const EmbeddingBatch& batch, double alpha_degrees,
                              double lambda_ang);

// Mean negative log-softmax of the true-class logit of z W^T + b.
XentResult cross_entropy_loss(const EmbeddingBatch& batch, const Classifier& classifier);

// total = local + lambda * phi + lambda_xent * xent; parts that are switched
// off contribute exactly zero. Classifier gradients are written to the
// optional out-parameters when the cross-entropy part is active.
LossValue train_loss(const EmbeddingBatch& batch, const LossConfig& cfg,
                     const Classifier* classifier = nullptr, Matrix* grad_weights = nullptr,
                     Vector* grad_bias = nullptr);

}  // namespace otml
