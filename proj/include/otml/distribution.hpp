#pragma once

#include <optional>
#include <vector>

#include "otml/common.hpp"

namespace otml {

// Weighted finite point set on R^l. Weights are nonnegative and sum to 1.
struct DiscreteDistribution {
  Matrix supports;  // n x l, one point per row
  Vector weights;   // n, sums to 1

  Index size() const { return supports.rows(); }
  Index dim() const { return supports.cols(); }
};

// Pairwise transport costs: entries(i,j) = scale * d(u_i, v_j)^p.
struct CostMatrix {
  Matrix entries;  // n x m
  double p = 2.0;
  double scale = 0.5;
};

// N unit-norm embedding rows with integer labels in [0, K).
// Plain aggregate: construct via make_embedding_batch to enforce invariants.
struct EmbeddingBatch {
  Matrix vectors;           // N x l, rows unit norm
  std::vector<int> labels;  // N
  int num_classes = 0;      // K

  Index size() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

// Normalizes weights to sum exactly 1 (fixed point: re-normalizing a
// normalized vector returns it unchanged). Weights that fall below 1e-12
// after normalization are clamped to 0 before the final pass.
Vector normalize_weights(const Vector& w);

// points: n x l matrix of support rows. Omitted weights default to uniform.
DiscreteDistribution make_distribution(const Matrix& points,
                                       const std::optional<Vector>& weights = std::nullopt);

CostMatrix pairwise_cost(const DiscreteDistribution& a, const DiscreteDistribution& b,
                         double p = 2.0, double scale = 0.5);

// Validates unit norms (1e-6), label range, and shape agreement.
EmbeddingBatch make_embedding_batch(const Matrix& vectors, const std::vector<int>& labels,
                                    int num_classes);

// Squared Euclidean distances between rows of A and rows of B.
Matrix pairwise_sq_dist(const Matrix& A, const Matrix& B);

}  // namespace otml
