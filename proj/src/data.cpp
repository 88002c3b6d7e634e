#include "otml/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace otml {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_real(const std::string& tok, int line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    fail_arg("dataset line " + std::to_string(line_no) + ": bad real value '" + tok + "'");
  return v;
}

int parse_label(const std::string& tok, int line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0' || v < 0)
    fail_arg("dataset line " + std::to_string(line_no) + ": bad label token '" + tok + "'");
  return int(v);
}

template <typename T>
void shuffle_indices(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[std::size_t(rng.below(i))]);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_arg("load_dataset: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Index dim = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> toks;
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(trim(tok));
    if (toks.size() < 2)
      fail_arg("dataset line " + std::to_string(line_no) + ": expected label plus features");
    if (dim < 0)
      dim = Index(toks.size()) - 1;
    else if (Index(toks.size()) - 1 != dim)
      fail_arg("dataset line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
               " features, found " + std::to_string(toks.size() - 1));
    labels.push_back(parse_label(toks[0], line_no));
    std::vector<double> feats;
    for (std::size_t i = 1; i < toks.size(); ++i) feats.push_back(parse_real(toks[i], line_no));
    rows.push_back(std::move(feats));
  }
  if (rows.empty()) fail_arg("load_dataset: no samples in '" + path + "'");
  Dataset d;
  d.features.resize(Index(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < dim; ++j) d.features(Index(i), j) = rows[i][std::size_t(j)];
  d.labels = labels;
  d.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (d.size() < d.num_classes) fail_arg("load_dataset: more classes than rows");
  return d;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_arg("save_dataset: cannot open '" + path + "' for writing");
  out << "# label";
  for (Index j = 0; j < dataset.dim(); ++j) out << ",f" << j;
  out << "\n";
  for (Index i = 0; i < dataset.size(); ++i) {
    out << dataset.labels[std::size_t(i)];
    for (Index j = 0; j < dataset.dim(); ++j) out << "," << fmt_full(dataset.features(i, j));
    out << "\n";
  }
  if (!out) fail_arg("save_dataset: write failed for '" + path + "'");
}

Dataset synth_gaussian_mixture(int num_classes, int per_class, int dim, double separation,
                               std::uint64_t seed) {
  if (num_classes < 2) fail_arg("synth_gaussian_mixture: need at least 2 classes");
  if (per_class < 2) fail_arg("synth_gaussian_mixture: need at least 2 samples per class");
  if (dim < 1) fail_arg("synth_gaussian_mixture: dimension must be >= 1");
  if (!(separation >= 0.0)) fail_arg("synth_gaussian_mixture: separation must be >= 0");

  Rng rng(seed);
  std::vector<Vector> dirs;
  int attempts = 0;
  while (int(dirs.size()) < num_classes) {
    if (++attempts > 100000)
      fail_arg("synth_gaussian_mixture: cannot place " + std::to_string(num_classes) +
               " class directions 60 degrees apart in dimension " + std::to_string(dim));
    Vector cand(dim);
    for (int j = 0; j < dim; ++j) cand[j] = rng.normal();
    double nrm = cand.norm();
    if (nrm < 1e-9) continue;
    cand /= nrm;
    bool ok = true;
    for (const Vector& d : dirs)
      if (cand.dot(d) > 0.5) {  // closer than 60 degrees
        ok = false;
        break;
      }
    if (ok) dirs.push_back(cand);
  }

  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(Index(num_classes) * per_class, dim);
  out.labels.resize(std::size_t(num_classes) * std::size_t(per_class));
  Index row = 0;
  for (int k = 0; k < num_classes; ++k) {
    for (int s = 0; s < per_class; ++s, ++row) {
      for (int j = 0; j < dim; ++j)
        out.features(row, j) = separation * dirs[std::size_t(k)][j] + rng.normal();
      out.labels[std::size_t(row)] = k;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> default_asymmetric_map() {
  return {{9, 1}, {2, 0}, {4, 7}, {3, 5}, {5, 3}};
}

NoiseResult inject_noise(const std::vector<int>& labels, const NoiseSpec& spec, int num_classes) {
  if (spec.delta < 0.0 || spec.delta > 1.0) fail_arg("inject_noise: delta must be in [0,1]");
  if (num_classes < 1) fail_arg("inject_noise: class count must be >= 1");
  for (int y : labels)
    if (y < 0 || y >= num_classes) fail_arg("inject_noise: label out of range");
  if (spec.kind == NoiseKind::Asymmetric && spec.transition_map.empty())
    fail_arg("inject_noise: asymmetric noise requires a transition map");
  if (spec.kind != NoiseKind::Asymmetric && !spec.transition_map.empty())
    fail_arg("inject_noise: transition map only applies to asymmetric noise");

  NoiseResult out;
  out.labels = labels;
  out.corruption_mask.assign(labels.size(), 0);
  if (spec.kind == NoiseKind::Clean || spec.delta == 0.0) return out;

  Rng rng(spec.seed);
  if (spec.kind == NoiseKind::Symmetric) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (rng.uniform() < spec.delta) {
        int drawn = int(rng.below(std::uint64_t(num_classes)));
        out.labels[i] = drawn;
        out.corruption_mask[i] = (drawn != labels[i]) ? 1 : 0;
      }
    }
    return out;
  }

  std::unordered_map<int, int> map;
  for (auto [from, to] : spec.transition_map) {
    if (from < 0 || from >= num_classes || to < 0 || to >= num_classes)
      fail_arg("inject_noise: transition class outside [0, K)");
    map[from] = to;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (rng.uniform() < spec.delta) {
      auto it = map.find(labels[i]);
      if (it != map.end() && it->second != labels[i]) {
        out.labels[i] = it->second;
        out.corruption_mask[i] = 1;
      }
    }
  }
  return out;
}

std::vector<std::vector<Index>> balanced_batches(const Dataset& dataset, int batch_size, int r,
                                                 std::uint64_t seed, int epoch) {
  if (r < 1) fail_arg("balanced_batches: r must be >= 1");
  if (batch_size < r) fail_arg("balanced_batches: batch size below per-class minimum r");
  const int num_classes = dataset.num_classes;
  std::vector<std::vector<Index>> class_rows(static_cast<std::size_t>(num_classes));
  for (Index i = 0; i < dataset.size(); ++i)
    class_rows[std::size_t(dataset.labels[std::size_t(i)])].push_back(i);
  for (int k = 0; k < num_classes; ++k)
    if (int(class_rows[std::size_t(k)].size()) < r)
      fail_arg("balanced_batches: class " + std::to_string(k) + " has fewer than r=" +
               std::to_string(r) + " rows");

  const int slots = std::min(num_classes, batch_size / r);  // classes per batch
  const int quota = batch_size / slots;                     // rows per included class

  Rng rng(seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t(epoch) + 1));
  std::vector<int> class_order(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) class_order[std::size_t(k)] = k;
  shuffle_indices(class_order, rng);

  struct Queue {
    std::vector<Index> perm;
    std::size_t next = 0;
    long consumed = 0;
  };
  std::vector<Queue> queues(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    queues[std::size_t(k)].perm = class_rows[std::size_t(k)];
    shuffle_indices(queues[std::size_t(k)].perm, rng);
  }

  auto all_covered = [&]() {
    for (int k = 0; k < num_classes; ++k)
      if (queues[std::size_t(k)].consumed < long(class_rows[std::size_t(k)].size())) return false;
    return true;
  };

  std::vector<std::vector<Index>> batches;
  int rot = 0;
  long guard = 0;
  while (!all_covered()) {
    if (++guard > 100000 + 100L * dataset.size())
      fail_num("balanced_batches: batch schedule failed to terminate");
    std::vector<Index> batch;
    batch.reserve(std::size_t(slots) * std::size_t(quota));
    for (int s = 0; s < slots; ++s) {
      int k = class_order[std::size_t((rot + s) % num_classes)];
      Queue& q = queues[std::size_t(k)];
      for (int t = 0; t < quota; ++t) {
        if (q.next == q.perm.size()) {
          shuffle_indices(q.perm, rng);
          q.next = 0;
        }
        batch.push_back(q.perm[q.next++]);
        ++q.consumed;
      }
    }
    rot = (rot + slots) % num_classes;
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace otml
