#pragma once

#include <string>
#include <utility>
#include <vector>

#include "otml/common.hpp"

namespace otml {

enum class Split { Train, Test };

// Raw feature rows (not necessarily unit norm) with labels in [0, K).
struct Dataset {
  Matrix features;          // N x d
  std::vector<int> labels;  // N
  int num_classes = 0;
  Split split = Split::Train;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

enum class NoiseKind { Clean, Symmetric, Asymmetric };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Clean;
  double delta = 0.0;  // corruption probability per row
  std::vector<std::pair<int, int>> transition_map;  // asymmetric only
  std::uint64_t seed = 0;
};

struct NoiseResult {
  std::vector<int> labels;
  std::vector<char> corruption_mask;  // 1 where the stored label changed
};

// Line-oriented text: one sample per line, comma separated, integer label
// first then the features. Lines starting with '#' are ignored.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

// Class means at separation * (random unit directions kept pairwise >= 60
// degrees apart by rejection), unit-variance Gaussian samples around them.
Dataset synth_gaussian_mixture(int num_classes, int per_class, int dim, double separation,
                               std::uint64_t seed);

// Symmetric: with probability delta the label is redrawn uniformly over all
// classes (the true one included, so the changed fraction concentrates at
// delta * (K-1) / K). Asymmetric: with probability delta the label is pushed
// through the transition map; unmapped classes never change.
NoiseResult inject_noise(const std::vector<int>& labels, const NoiseSpec& spec, int num_classes);

// Class-index confusion pairs used when no explicit map is given:
// 9->1, 2->0, 4->7, and 3<->5.
std::vector<std::pair<int, int>> default_asymmetric_map();

// One epoch of class-balanced batches: every included class contributes the
// same per-class quota (>= r rows), classes rotate round-robin over a seeded
// shuffle, and per-class row queues reshuffle on exhaustion. The epoch ends
// once every class has cycled through all its rows, so the union of batches
// covers every index at least once.
std::vector<std::vector<Index>> balanced_batches(const Dataset& dataset, int batch_size, int r,
                                                 std::uint64_t seed, int epoch);

}  // namespace otml
