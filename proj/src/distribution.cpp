#include "otml/distribution.hpp"

#include <cmath>

namespace otml {

namespace {

// Adds the float-sum residual onto the largest weight until the sum is
// exactly 1.0, so normalization is bitwise idempotent.
void compensate_sum(Vector& w) {
  for (int pass = 0; pass < 10; ++pass) {
    double s = 0.0;
    for (Index i = 0; i < w.size(); ++i) s += w[i];
    if (s == 1.0) return;
    Index imax = 0;
    w.maxCoeff(&imax);
    w[imax] += 1.0 - s;
  }
}

}  // namespace

Vector normalize_weights(const Vector& w) {
  if (w.size() == 0) fail_arg("normalize_weights: empty weight vector");
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) fail_arg("normalize_weights: negative or non-finite weight");
    s += w[i];
  }
  if (s <= 0.0) fail_arg("normalize_weights: weights sum to zero");
  Vector out = w;
  if (s != 1.0) out /= s;
  bool clamped = false;
  for (Index i = 0; i < out.size(); ++i) {
    if (out[i] != 0.0 && out[i] < 1e-12) {
      out[i] = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    double s2 = out.sum();
    if (s2 <= 0.0) fail_arg("normalize_weights: all weights clamped to zero");
    out /= s2;
  }
  compensate_sum(out);
  return out;
}

DiscreteDistribution make_distribution(const Matrix& points, const std::optional<Vector>& weights) {
  if (points.rows() == 0) fail_arg("make_distribution: no support points");
  if (points.cols() < 1) fail_arg("make_distribution: dimension must be >= 1");
  if (!points.allFinite()) fail_arg("make_distribution: non-finite support coordinate");
  DiscreteDistribution d;
  d.supports = points;
  if (weights) {
    if (weights->size() != points.rows())
      fail_arg("make_distribution: weight count does not match point count");
    d.weights = normalize_weights(*weights);
  } else {
    d.weights = Vector::Constant(points.rows(), 1.0 / double(points.rows()));
    compensate_sum(d.weights);
  }
  return d;
}

Matrix pairwise_sq_dist(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) fail_arg("pairwise_sq_dist: dimension mismatch");
  Matrix out(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.rows(); ++j) out(i, j) = (A.row(i) - B.row(j)).squaredNorm();
  return out;
}

CostMatrix pairwise_cost(const DiscreteDistribution& a, const DiscreteDistribution& b, double p,
                         double scale) {
  if (a.dim() != b.dim()) fail_arg("pairwise_cost: support dimension mismatch");
  if (p < 1.0) fail_arg("pairwise_cost: exponent p must be >= 1");
  if (!(scale > 0.0)) fail_arg("pairwise_cost: scale must be positive");
  CostMatrix c;
  c.p = p;
  c.scale = scale;
  c.entries.resize(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = 0; j < b.size(); ++j) {
      double d2 = (a.supports.row(i) - b.supports.row(j)).squaredNorm();
      double v;
      if (p == 2.0)
        v = d2;
      else if (p == 1.0)
        v = std::sqrt(d2);
      else
        v = std::pow(std::sqrt(d2), p);
      c.entries(i, j) = scale * v;
    }
  }
  return c;
}

EmbeddingBatch make_embedding_batch(const Matrix& vectors, const std::vector<int>& labels,
                                    int num_classes) {
  if (vectors.rows() == 0) fail_arg("make_embedding_batch: empty batch");
  if (Index(labels.size()) != vectors.rows())
    fail_arg("make_embedding_batch: label count does not match row count");
  if (num_classes < 1) fail_arg("make_embedding_batch: class count must be >= 1");
  for (Index i = 0; i < vectors.rows(); ++i) {
    if (std::abs(vectors.row(i).norm() - 1.0) > 1e-6)
      fail_arg("make_embedding_batch: row " + std::to_string(i) + " is not unit norm");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      fail_arg("make_embedding_batch: label out of range at row " + std::to_string(i));
  }
  EmbeddingBatch b;
  b.vectors = vectors;
  b.labels = labels;
  b.num_classes = num_classes;
  return b;
}

}  // namespace otml
