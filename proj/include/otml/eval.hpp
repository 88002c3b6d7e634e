#pragma once

#include <map>
#include <string>
#include <vector>

#include "otml/common.hpp"

namespace otml {

struct EvalReport {
  double accuracy = 0.0;
  double nmi = 0.0;
  std::map<int, double> recall_at;
  std::string notes;
};

// key=value lines, recall keys as recall_at_<k>, sorted.
std::string serialize_report(const EvalReport& report);

// Multinomial logistic regression from zero init by full-batch gradient
// descent on the train embeddings; returns test accuracy. Zero init plus
// full-batch steps make the fit equivariant under rotations of the
// embedding space.
double linear_probe(const Matrix& train_embeddings, const std::vector<int>& train_labels,
                    const Matrix& test_embeddings, const std::vector<int>& test_labels,
                    int epochs = 200, double learning_rate = 0.5);

// Lloyd iterations from k distinct seeded rows. Ties in assignment go to
// the lowest center index; a cluster left empty keeps its previous center.
std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 100);

// Mutual information over the joint label histogram, normalized by the
// arithmetic mean of the two entropies. Two constant assignments score 1;
// if exactly one side is constant the score is 0.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Fraction of queries whose k nearest neighbors (Euclidean, self excluded,
// distance ties broken by row index) contain a same-label row.
std::map<int, double> recall_at_k(const Matrix& embeddings, const std::vector<int>& labels,
                                  const std::vector<int>& ks);

// (mean_a - mean_b) / sqrt(std_a^2/n_a + std_b^2/n_b). The 0/0 case (equal
// means, both variances zero) is an error; a zero denominator alone yields
// the signed infinity.
double welch_t(double mean_a, double std_a, long n_a, double mean_b, double std_b, long n_b);

}  // namespace otml
