#include "otml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace otml {

std::string serialize_report(const EvalReport& report) {
  std::ostringstream out;
  out << "accuracy=" << fmt_full(report.accuracy) << "\n";
  out << "nmi=" << fmt_full(report.nmi) << "\n";
  for (const auto& [k, v] : report.recall_at)
    out << "recall_at_" << k << "=" << fmt_full(v) << "\n";
  if (!report.notes.empty()) out << "notes=" << report.notes << "\n";
  return out.str();
}

namespace {

int label_span(const std::vector<int>& labels) {
  int top = -1;
  for (int y : labels) {
    if (y < 0) fail_arg("labels must be non-negative");
    top = std::max(top, y);
  }
  return top + 1;
}

}  // namespace

double linear_probe(const Matrix& train_embeddings, const std::vector<int>& train_labels,
                    const Matrix& test_embeddings, const std::vector<int>& test_labels,
                    int epochs, double learning_rate) {
  const Index n_train = train_embeddings.rows();
  const Index n_test = test_embeddings.rows();
  if (n_train != Index(train_labels.size()) || n_test != Index(test_labels.size()))
    fail_arg("linear_probe: embedding rows and label counts differ");
  if (n_train == 0 || n_test == 0) fail_arg("linear_probe: empty split");
  if (train_embeddings.cols() != test_embeddings.cols())
    fail_arg("linear_probe: train and test embedding dims differ");
  if (epochs < 0) fail_arg("linear_probe: epochs must be non-negative");
  if (!(learning_rate > 0.0)) fail_arg("linear_probe: learning rate must be positive");

  const int num_classes = std::max(label_span(train_labels), label_span(test_labels));
  int distinct = 0;
  {
    std::vector<char> seen(num_classes, 0);
    for (int y : train_labels)
      if (!seen[y]) {
        seen[y] = 1;
        ++distinct;
      }
  }
  if (distinct < 2) fail_arg("linear_probe: training split holds a single class");

  const Index l = train_embeddings.cols();
  Matrix w = Matrix::Zero(num_classes, l);
  Vector b = Vector::Zero(num_classes);
  const double inv_n = 1.0 / double(n_train);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Matrix logits = train_embeddings * w.transpose();
    logits.rowwise() += b.transpose();
    Matrix grad_w = Matrix::Zero(num_classes, l);
    Vector grad_b = Vector::Zero(num_classes);
    for (Index i = 0; i < n_train; ++i) {
      Eigen::RowVectorXd row = logits.row(i);
      const double mx = row.maxCoeff();
      Eigen::RowVectorXd probs = (row.array() - mx).exp();
      probs /= probs.sum();
      probs(train_labels[i]) -= 1.0;
      grad_w += inv_n * probs.transpose() * train_embeddings.row(i);
      grad_b += inv_n * probs.transpose();
    }
    w -= learning_rate * grad_w;
    b -= learning_rate * grad_b;
  }

  long correct = 0;
  Matrix logits = test_embeddings * w.transpose();
  logits.rowwise() += b.transpose();
  for (Index i = 0; i < n_test; ++i) {
    Index pred = 0;
    logits.row(i).maxCoeff(&pred);  // first maximum wins on ties
    if (int(pred) == test_labels[i]) ++correct;
  }
  return double(correct) / double(n_test);
}

std::vector<int> kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters) {
  const Index n = points.rows();
  if (k < 1) fail_arg("kmeans: k must be positive");
  if (n < k) fail_arg("kmeans: fewer points than clusters");
  if (max_iters < 1) fail_arg("kmeans: max_iters must be positive");

  Rng rng(seed);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  for (Index i = 0; i < Index(k); ++i) {
    const Index j = i + Index(rng.below(std::uint64_t(n - i)));
    std::swap(order[i], order[j]);
  }
  Matrix centers(k, points.cols());
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(order[c]);

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
      long count = 0;
      for (Index i = 0; i < n; ++i)
        if (assign[i] == c) {
          sum += points.row(i);
          ++count;
        }
      if (count > 0) centers.row(c) = sum / double(count);
    }
  }
  return assign;
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) fail_arg("nmi: assignments have different lengths");
  if (a.empty()) fail_arg("nmi: empty assignments");
  const int ka = label_span(a), kb = label_span(b);
  const double n = double(a.size());

  std::vector<double> pa(ka, 0.0), pb(kb, 0.0);
  std::vector<std::vector<double>> joint(ka, std::vector<double>(kb, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    joint[a[i]][b[i]] += 1.0;
  }
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (double c : pa)
    if (c > 0) ha -= (c / n) * std::log(c / n);
  for (double c : pb)
    if (c > 0) hb -= (c / n) * std::log(c / n);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double c = joint[i][j];
      if (c > 0) mi += (c / n) * std::log(c * n / (pa[i] * pb[j]));
    }

  if (ha == 0.0 && hb == 0.0) return 1.0;  // two constant assignments agree as partitions
  if (ha == 0.0 || hb == 0.0) return 0.0;
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

std::map<int, double> recall_at_k(const Matrix& embeddings, const std::vector<int>& labels,
                                  const std::vector<int>& ks) {
  const Index n = embeddings.rows();
  if (n != Index(labels.size())) fail_arg("recall_at_k: rows and label count differ");
  if (ks.empty()) fail_arg("recall_at_k: no k values given");
  int max_k = 0;
  for (int k : ks) {
    if (k < 1) fail_arg("recall_at_k: k must be positive");
    if (Index(k) >= n) fail_arg("recall_at_k: k must be smaller than the number of rows");
    max_k = std::max(max_k, k);
  }

  std::map<int, long> hits;
  for (int k : ks) hits[k] = 0;
  std::vector<std::pair<double, Index>> others;
  others.reserve(std::size_t(n) - 1);
  for (Index i = 0; i < n; ++i) {
    others.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) others.emplace_back((embeddings.row(i) - embeddings.row(j)).squaredNorm(), j);
    std::partial_sort(others.begin(), others.begin() + max_k, others.end());
    for (auto& [k, count] : hits) {  // one pass per distinct k, duplicates collapse
      bool hit = false;
      for (int t = 0; t < k && !hit; ++t) hit = labels[others[t].second] == labels[i];
      if (hit) ++count;
    }
  }
  std::map<int, double> out;
  for (const auto& [k, count] : hits) out[k] = double(count) / double(n);
  return out;
}

double welch_t(double mean_a, double std_a, long n_a, double mean_b, double std_b, long n_b) {
  if (n_a < 2 || n_b < 2) fail_arg("welch_t: each sample needs at least 2 observations");
  if (std_a < 0.0 || std_b < 0.0) fail_arg("welch_t: standard deviations must be non-negative");
  const double denom_sq = std_a * std_a / double(n_a) + std_b * std_b / double(n_b);
  if (denom_sq == 0.0 && mean_a == mean_b)
    fail_arg("welch_t: 0/0 with equal means and zero variances");
  return (mean_a - mean_b) / std::sqrt(denom_sq);
}

}  // namespace otml
