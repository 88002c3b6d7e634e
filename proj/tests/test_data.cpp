#include "otml/data.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

using namespace otml;

namespace {

std::string temp_path(const std::string& name) {
  return "/tmp/otml_test_" + name;
}

Dataset tiny_dataset() {
  Dataset d;
  d.features.resize(4, 2);
  d.features << 1.0 / 3.0, -2.5, 0.125, 1e-9, 7.0, 0.0, -1.0, 1.0 / 7.0;
  d.labels = {0, 1, 1, 0};
  d.num_classes = 2;
  return d;
}

}  // namespace

TEST_CASE("dataset save and load round-trip bitwise") {
  Dataset d = tiny_dataset();
  const std::string path = temp_path("roundtrip.csv");
  save_dataset(d, path);
  Dataset back = load_dataset(path);
  CHECK(back.num_classes == 2);
  CHECK(back.labels == d.labels);
  REQUIRE(back.features.rows() == d.features.rows());
  REQUIRE(back.features.cols() == d.features.cols());
  CHECK((back.features - d.features).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("load_dataset errors carry line numbers") {
  const std::string path = temp_path("broken.csv");
  {
    std::ofstream f(path);
    f << "# comment\n0,1.0,2.0\n1,3.0\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 3"), std::invalid_argument);
  {
    std::ofstream f(path);
    f << "zebra,1.0\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 1"), std::invalid_argument);
  {
    std::ofstream f(path);
    f << "# only a comment\n";
  }
  CHECK_THROWS_AS(load_dataset(path), std::invalid_argument);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_dataset(temp_path("missing.csv")), std::invalid_argument);
}

TEST_CASE("synthetic mixture is deterministic with labeled class blocks") {
  Dataset a = synth_gaussian_mixture(3, 20, 5, 4.0, 99);
  Dataset b = synth_gaussian_mixture(3, 20, 5, 4.0, 99);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  REQUIRE(a.size() == 60);
  CHECK(a.num_classes == 3);
  for (Index i = 0; i < 60; ++i) CHECK(a.labels[std::size_t(i)] == int(i / 20));

  Dataset c = synth_gaussian_mixture(3, 20, 5, 4.0, 100);
  CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("synthetic class means sit near separated centers") {
  const double sep = 10.0;
  Dataset d = synth_gaussian_mixture(4, 50, 6, sep, 7);
  std::vector<Vector> means(4, Vector::Zero(6));
  for (Index i = 0; i < d.size(); ++i)
    means[std::size_t(d.labels[std::size_t(i)])] += d.features.row(i).transpose() / 50.0;
  // directions are kept >= 60 degrees apart, so centers are >= sep apart
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) CHECK((means[i] - means[j]).norm() > 0.5 * sep);
}

TEST_CASE("synthetic mixture validation and rejection failure") {
  CHECK_THROWS_AS(synth_gaussian_mixture(1, 10, 3, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian_mixture(2, 1, 3, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian_mixture(2, 10, 0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian_mixture(2, 10, 3, -1.0, 0), std::invalid_argument);
  // dimension 1 fits two directions at most
  CHECK_THROWS_AS(synth_gaussian_mixture(3, 10, 1, 1.0, 0), std::invalid_argument);
}

TEST_CASE("noise: clean and zero-delta leave labels untouched") {
  std::vector<int> labels = {0, 1, 2, 1, 0};
  NoiseSpec spec;
  spec.kind = NoiseKind::Clean;
  spec.delta = 0.4;  // ignored for the clean kind
  NoiseResult r = inject_noise(labels, spec, 3);
  CHECK(r.labels == labels);
  for (char m : r.corruption_mask) CHECK(m == 0);

  spec.kind = NoiseKind::Symmetric;
  spec.delta = 0.0;
  r = inject_noise(labels, spec, 3);
  CHECK(r.labels == labels);
}

TEST_CASE("symmetric noise changes the expected fraction") {
  const int n = 10000, k = 10;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % k;
  NoiseSpec spec;
  spec.kind = NoiseKind::Symmetric;
  spec.delta = 0.3;
  spec.seed = 424242;
  NoiseResult r = inject_noise(labels, spec, k);

  int changed = 0;
  for (int i = 0; i < n; ++i) {
    const bool moved = r.labels[i] != labels[i];
    CHECK(bool(r.corruption_mask[std::size_t(i)]) == moved);
    changed += moved ? 1 : 0;
  }
  // redraw includes the true class: expected rate delta * (k-1) / k
  const double expect = 0.3 * 9.0 / 10.0;
  const double sigma = std::sqrt(expect * (1.0 - expect) / n);
  CHECK(std::abs(double(changed) / n - expect) <= 3.0 * sigma);
}

TEST_CASE("symmetric noise is seed-deterministic") {
  std::vector<int> labels(500);
  for (int i = 0; i < 500; ++i) labels[i] = i % 4;
  NoiseSpec spec;
  spec.kind = NoiseKind::Symmetric;
  spec.delta = 0.5;
  spec.seed = 7;
  NoiseResult a = inject_noise(labels, spec, 4);
  NoiseResult b = inject_noise(labels, spec, 4);
  CHECK(a.labels == b.labels);
  CHECK(a.corruption_mask == b.corruption_mask);
  spec.seed = 8;
  NoiseResult c = inject_noise(labels, spec, 4);
  CHECK(a.labels != c.labels);
}

TEST_CASE("asymmetric noise moves only mapped classes") {
  const int n = 5000, k = 10;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % k;
  NoiseSpec spec;
  spec.kind = NoiseKind::Asymmetric;
  spec.delta = 0.2;
  spec.seed = 11;
  spec.transition_map = default_asymmetric_map();

  std::set<int> mapped = {9, 2, 4, 3, 5};
  NoiseResult r = inject_noise(labels, spec, k);
  int changed = 0;
  for (int i = 0; i < n; ++i) {
    if (r.labels[i] != labels[i]) {
      CHECK(mapped.count(labels[std::size_t(i)]) == 1);
      CHECK(bool(r.corruption_mask[std::size_t(i)]));
      ++changed;
    } else {
      CHECK(!r.corruption_mask[std::size_t(i)]);
    }
  }
  CHECK(changed > 0);
}

TEST_CASE("asymmetric noise at delta one moves every mapped row") {
  std::vector<int> labels = {0, 0, 1, 1, 0};
  NoiseSpec spec;
  spec.kind = NoiseKind::Asymmetric;
  spec.delta = 1.0;
  spec.transition_map = {{0, 1}};
  NoiseResult r = inject_noise(labels, spec, 2);
  CHECK(r.labels == std::vector<int>{1, 1, 1, 1, 1});

  // identity entries change nothing
  spec.transition_map = {{0, 0}};
  r = inject_noise(labels, spec, 2);
  CHECK(r.labels == labels);
  for (char m : r.corruption_mask) CHECK(m == 0);
}

TEST_CASE("inject_noise validation") {
  std::vector<int> labels = {0, 1};
  NoiseSpec spec;
  spec.kind = NoiseKind::Symmetric;
  spec.delta = 1.5;
  CHECK_THROWS_AS(inject_noise(labels, spec, 2), std::invalid_argument);

  spec.delta = 0.5;
  spec.transition_map = {{0, 1}};
  CHECK_THROWS_AS(inject_noise(labels, spec, 2), std::invalid_argument);  // map on symmetric

  spec.kind = NoiseKind::Asymmetric;
  spec.transition_map.clear();
  CHECK_THROWS_AS(inject_noise(labels, spec, 2), std::invalid_argument);  // missing map

  spec.transition_map = {{0, 5}};
  CHECK_THROWS_AS(inject_noise(labels, spec, 2), std::invalid_argument);  // target outside K

  spec.transition_map = {{0, 1}};
  CHECK_THROWS_AS(inject_noise({0, 3}, spec, 2), std::invalid_argument);  // label outside K
}

TEST_CASE("balanced batches: full-class batches cover the dataset") {
  Dataset d = synth_gaussian_mixture(10, 30, 8, 3.0, 5);
  auto batches = balanced_batches(d, 100, 10, 77, 0);
  REQUIRE(!batches.empty());
  std::set<Index> seen;
  for (const auto& batch : batches) {
    REQUIRE(batch.size() == 100);
    std::vector<int> per_class(10, 0);
    for (Index i : batch) {
      ++per_class[std::size_t(d.labels[std::size_t(i)])];
      seen.insert(i);
    }
    for (int k = 0; k < 10; ++k) CHECK(per_class[std::size_t(k)] == 10);
  }
  CHECK(Index(seen.size()) == d.size());
}

TEST_CASE("balanced batches: pair-sized quotas") {
  Dataset d = synth_gaussian_mixture(10, 12, 8, 3.0, 6);
  auto batches = balanced_batches(d, 20, 2, 13, 2);
  for (const auto& batch : batches) {
    REQUIRE(batch.size() == 20);
    std::vector<int> per_class(10, 0);
    for (Index i : batch) ++per_class[std::size_t(d.labels[std::size_t(i)])];
    for (int k = 0; k < 10; ++k) CHECK(per_class[std::size_t(k)] == 2);
  }
}

TEST_CASE("balanced batches rotate classes when not all fit") {
  Dataset d = synth_gaussian_mixture(4, 9, 3, 3.0, 8);
  auto batches = balanced_batches(d, 10, 3, 21, 0);
  std::set<int> classes_seen;
  std::set<Index> rows_seen;
  for (const auto& batch : batches) {
    std::vector<int> per_class(4, 0);
    for (Index i : batch) {
      ++per_class[std::size_t(d.labels[std::size_t(i)])];
      rows_seen.insert(i);
    }
    int present = 0;
    for (int k = 0; k < 4; ++k)
      if (per_class[std::size_t(k)] > 0) {
        ++present;
        classes_seen.insert(k);
        CHECK(per_class[std::size_t(k)] >= 3);  // quota respects r
      }
    CHECK(present == 3);  // slots = min(4, 10/3) = 3
  }
  CHECK(classes_seen.size() == 4);
  CHECK(Index(rows_seen.size()) == d.size());
}

TEST_CASE("balanced batches are deterministic per seed and epoch") {
  Dataset d = synth_gaussian_mixture(5, 10, 3, 3.0, 9);
  auto a = balanced_batches(d, 20, 2, 55, 3);
  auto b = balanced_batches(d, 20, 2, 55, 3);
  CHECK(a == b);
  auto c = balanced_batches(d, 20, 2, 55, 4);
  CHECK(a != c);
}

TEST_CASE("balanced batches validation") {
  Dataset d = synth_gaussian_mixture(3, 2, 3, 3.0, 10);
  CHECK_THROWS_AS(balanced_batches(d, 12, 3, 1, 0), std::invalid_argument);  // class smaller than r
  CHECK_THROWS_AS(balanced_batches(d, 12, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(balanced_batches(d, 1, 2, 1, 0), std::invalid_argument);  // batch below r
}
