#include "otml/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace otml {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail_arg("config line " + std::to_string(line_no) + ": missing '='");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail_arg("config line " + std::to_string(line_no) + ": empty key");
    if (kv.count(key)) fail_arg("duplicate config key: " + key);
    kv[key] = value;
  }
  return kv;
}

std::string serialize_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

namespace {

class KeyReader {
 public:
  explicit KeyReader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return kv_.count(key) != 0;
  }

  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  long integer(const std::string& key, long fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(it->second.c_str(), &end, 10);
    if (errno || end == it->second.c_str() || *end != '\0')
      fail_arg(key + ": not an integer: '" + it->second + "'");
    return v;
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (errno || end == it->second.c_str() || *end != '\0' ||
        it->second.find('-') != std::string::npos)
      fail_arg(key + ": not an unsigned integer: '" + it->second + "'");
    return std::uint64_t(v);
  }

  double real(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (errno || end == it->second.c_str() || *end != '\0')
      fail_arg(key + ": not a real number: '" + it->second + "'");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    fail_arg(key + ": expected true or false, got '" + it->second + "'");
  }

  void reject_unknown() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) fail_arg("unknown config key: " + k);
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> used_;
};

LocalLoss parse_local(const std::string& key, const std::string& s) {
  if (s == "triplet") return LocalLoss::Triplet;
  if (s == "npairs") return LocalLoss::NPairs;
  if (s == "angular") return LocalLoss::Angular;
  if (s == "angular_npairs") return LocalLoss::AngularNPairs;
  if (s == "none") return LocalLoss::None;
  fail_arg(key + ": unknown local loss '" + s + "'");
}

std::string local_name(LocalLoss l) {
  switch (l) {
    case LocalLoss::Triplet: return "triplet";
    case LocalLoss::NPairs: return "npairs";
    case LocalLoss::Angular: return "angular";
    case LocalLoss::AngularNPairs: return "angular_npairs";
    case LocalLoss::None: return "none";
  }
  fail_arg("unrepresentable local loss");
}

std::string discrepancy_name(const std::optional<DiscrepancyKind>& d) {
  if (!d) return "none";
  switch (d->kind) {
    case Discrepancy::MMD_Laplacian: return "mmd_laplacian";
    case Discrepancy::MMD_Gaussian: return "mmd_gaussian";
    case Discrepancy::Wasserstein: return "wasserstein";
  }
  fail_arg("unrepresentable discrepancy");
}

std::string noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Clean: return "clean";
    case NoiseKind::Symmetric: return "symmetric";
    case NoiseKind::Asymmetric: return "asymmetric";
  }
  fail_arg("unrepresentable noise kind");
}

std::vector<std::pair<int, int>> parse_noise_map(const std::string& key, const std::string& s) {
  std::vector<std::pair<int, int>> map;
  if (s.empty()) return map;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) fail_arg(key + ": entries must look like from:to");
    errno = 0;
    char* end = nullptr;
    const std::string a = trim(item.substr(0, colon)), b = trim(item.substr(colon + 1));
    const long from = std::strtol(a.c_str(), &end, 10);
    if (errno || end == a.c_str() || *end != '\0') fail_arg(key + ": bad class id '" + a + "'");
    errno = 0;
    const long to = std::strtol(b.c_str(), &end, 10);
    if (errno || end == b.c_str() || *end != '\0') fail_arg(key + ": bad class id '" + b + "'");
    map.emplace_back(int(from), int(to));
  }
  return map;
}

std::string noise_map_to_string(const std::vector<std::pair<int, int>>& map) {
  std::string out;
  for (const auto& [a, b] : map) {
    if (!out.empty()) out += ',';
    out += std::to_string(a) + ":" + std::to_string(b);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (errno || end == t.c_str() || *end != '\0') fail_arg(key + ": bad integer '" + t + "'");
    out.push_back(int(v));
  }
  if (out.empty()) fail_arg(key + ": empty list");
  return out;
}

std::string int_list_to_string(const std::vector<int>& v) {
  std::string out;
  for (int x : v) {
    if (!out.empty()) out += ',';
    out += std::to_string(x);
  }
  return out;
}

}  // namespace

std::vector<std::pair<int, int>> parse_transition_map(const std::string& text) {
  return parse_noise_map("transition map", text);
}

std::vector<int> parse_int_list_arg(const std::string& text) {
  return parse_int_list("integer list", text);
}

ExperimentConfig resolve_config(const KeyValues& kv) {
  KeyReader r(kv);
  ExperimentConfig c;

  c.seed = r.unsigned64("seed", 1);

  c.data.file = r.str("data.file", "");
  c.data.test_file = r.str("data.test_file", "");
  c.data.synth_classes = int(r.integer("data.synth_classes", 5));
  c.data.synth_per_class = int(r.integer("data.synth_per_class", 40));
  c.data.synth_test_per_class = int(r.integer("data.synth_test_per_class", 20));
  c.data.synth_dim = int(r.integer("data.synth_dim", 8));
  c.data.synth_separation = r.real("data.synth_separation", 4.0);
  c.data.synth_seed = r.unsigned64("data.synth_seed", c.seed);
  if (c.data.file.empty()) {
    if (c.data.synth_classes < 2) fail_arg("data.synth_classes: need at least 2");
    if (c.data.synth_per_class < 2) fail_arg("data.synth_per_class: need at least 2");
    if (c.data.synth_test_per_class < 1) fail_arg("data.synth_test_per_class: need at least 1");
    if (c.data.synth_dim < 1) fail_arg("data.synth_dim: need at least 1");
    if (!(c.data.synth_separation > 0)) fail_arg("data.synth_separation: must be positive");
  }

  const std::string noise_kind = r.str("noise.kind", "clean");
  if (noise_kind == "clean")
    c.noise.kind = NoiseKind::Clean;
  else if (noise_kind == "symmetric")
    c.noise.kind = NoiseKind::Symmetric;
  else if (noise_kind == "asymmetric")
    c.noise.kind = NoiseKind::Asymmetric;
  else
    fail_arg("noise.kind: unknown kind '" + noise_kind + "'");
  c.noise.delta = r.real("noise.delta", 0.0);
  if (c.noise.delta < 0.0 || c.noise.delta > 1.0) fail_arg("noise.delta: must lie in [0,1]");
  c.noise.seed = r.unsigned64("noise.seed", c.seed);
  if (r.has("noise.map"))
    c.noise.transition_map = parse_noise_map("noise.map", r.str("noise.map", ""));
  else if (c.noise.kind == NoiseKind::Asymmetric)
    c.noise.transition_map = default_asymmetric_map();
  if (c.noise.kind != NoiseKind::Asymmetric && !c.noise.transition_map.empty())
    fail_arg("noise.map: only allowed with noise.kind=asymmetric");
  if (c.noise.kind == NoiseKind::Asymmetric && c.noise.transition_map.empty())
    fail_arg("noise.map: asymmetric noise needs a transition map");

  c.loss.local = parse_local("loss.local", r.str("loss.local", "triplet"));
  const std::string disc = r.str("loss.discrepancy", "none");
  c.sigma = r.real("loss.sigma", 0.05);
  if (!(c.sigma > 0)) fail_arg("loss.sigma: must be positive");
  c.sinkhorn.epsilon = r.real("loss.epsilon", 2.5e-3);
  if (!(c.sinkhorn.epsilon > 0)) fail_arg("loss.epsilon: must be positive");
  c.sinkhorn.max_iterations = int(r.integer("loss.sinkhorn_max_iterations", 10000));
  if (c.sinkhorn.max_iterations < 1) fail_arg("loss.sinkhorn_max_iterations: must be positive");
  c.sinkhorn.tolerance = r.real("loss.sinkhorn_tolerance", 1e-6);
  if (!(c.sinkhorn.tolerance > 0)) fail_arg("loss.sinkhorn_tolerance: must be positive");
  c.sinkhorn.log_domain = r.boolean("loss.sinkhorn_log_domain", true);
  if (disc == "none") {
    c.loss.discrepancy.reset();
  } else {
    DiscrepancyKind k;
    if (disc == "mmd_laplacian")
      k.kind = Discrepancy::MMD_Laplacian;
    else if (disc == "mmd_gaussian")
      k.kind = Discrepancy::MMD_Gaussian;
    else if (disc == "wasserstein")
      k.kind = Discrepancy::Wasserstein;
    else
      fail_arg("loss.discrepancy: unknown kind '" + disc + "'");
    k.sigma = c.sigma;
    k.sinkhorn = c.sinkhorn;
    c.loss.discrepancy = k;
  }

  const bool wasserstein =
      c.loss.discrepancy && c.loss.discrepancy->kind == Discrepancy::Wasserstein;
  c.loss.lambda =
      r.real("loss.lambda", c.loss.discrepancy ? (wasserstein ? 0.5 : 0.2) : 0.0);
  if (c.loss.lambda < 0) fail_arg("loss.lambda: must be non-negative");
  c.loss.lambda_xent = r.real("loss.lambda_xent", 1.0);
  if (c.loss.lambda_xent < 0) fail_arg("loss.lambda_xent: must be non-negative");
  c.loss.lambda_ang = r.real("loss.lambda_ang", 2.0);
  if (c.loss.lambda_ang < 0) fail_arg("loss.lambda_ang: must be non-negative");
  c.loss.tau = r.real("loss.tau", 0.5);
  if (!(c.loss.tau > 0)) fail_arg("loss.tau: must be positive");
  c.loss.alpha_degrees =
      r.real("loss.alpha_degrees", c.loss.local == LocalLoss::AngularNPairs ? 45.0 : 30.0);
  c.loss.use_xent = r.boolean("loss.use_xent", false);

  c.model.hidden_dim = int(r.integer("model.hidden_dim", 32));
  c.model.embedding_dim = int(r.integer("model.embedding_dim", 64));
  if (c.model.hidden_dim < 0) fail_arg("model.hidden_dim: must be non-negative");
  if (c.model.embedding_dim < 1) fail_arg("model.embedding_dim: must be positive");
  c.model.seed = r.unsigned64("model.seed", c.seed);

  const std::string opt_kind = r.str("opt.kind", "adam");
  if (opt_kind == "adam")
    c.opt.kind = OptKind::Adam;
  else if (opt_kind == "sgd_momentum")
    c.opt.kind = OptKind::SGDMomentum;
  else
    fail_arg("opt.kind: unknown kind '" + opt_kind + "'");
  c.opt.learning_rate =
      r.real("opt.learning_rate", c.opt.kind == OptKind::Adam ? 5e-4 : 1e-2);
  if (c.opt.learning_rate < 0) fail_arg("opt.learning_rate: must be non-negative");
  c.opt.momentum = r.real("opt.momentum", 0.9);
  c.opt.beta1 = r.real("opt.beta1", 0.9);
  c.opt.beta2 = r.real("opt.beta2", 0.999);
  c.opt.decay_factor = r.real("opt.decay_factor", 0.1);
  if (!(c.opt.decay_factor > 0 && c.opt.decay_factor <= 1))
    fail_arg("opt.decay_factor: must lie in (0,1]");
  c.opt.decay_every = int(r.integer("opt.decay_every", 50));
  if (c.opt.decay_every < 1) fail_arg("opt.decay_every: must be positive");
  c.opt.epochs = int(r.integer("opt.epochs", 100));
  if (c.opt.epochs < 0) fail_arg("opt.epochs: must be non-negative");
  c.opt.xent_warmup_epochs = int(r.integer("opt.xent_warmup_epochs", 0));
  if (c.opt.xent_warmup_epochs < 0) fail_arg("opt.xent_warmup_epochs: must be non-negative");
  c.opt.seed = r.unsigned64("opt.seed", c.seed);

  const bool pair_family = c.loss.local == LocalLoss::NPairs ||
                           c.loss.local == LocalLoss::Angular ||
                           c.loss.local == LocalLoss::AngularNPairs;
  c.r = int(r.integer("train.r", pair_family ? 2 : 10));
  if (c.r < 1) fail_arg("train.r: must be positive");
  c.batch_size = int(r.integer("train.batch_size", 0));
  if (c.batch_size < 0) fail_arg("train.batch_size: must be non-negative (0 = auto)");
  if (c.batch_size > 0 && c.batch_size < c.r)
    fail_arg("train.batch_size: must be at least train.r");

  if (r.has("eval.ks")) c.eval.ks = parse_int_list("eval.ks", r.str("eval.ks", ""));
  for (int k : c.eval.ks)
    if (k < 1) fail_arg("eval.ks: entries must be positive");
  c.eval.probe_epochs = int(r.integer("eval.probe_epochs", 200));
  if (c.eval.probe_epochs < 0) fail_arg("eval.probe_epochs: must be non-negative");
  c.eval.probe_lr = r.real("eval.probe_lr", 0.5);
  if (!(c.eval.probe_lr > 0)) fail_arg("eval.probe_lr: must be positive");
  c.eval.kmeans_seed = r.unsigned64("eval.kmeans_seed", c.seed);
  c.eval.kmeans_iters = int(r.integer("eval.kmeans_iters", 100));
  if (c.eval.kmeans_iters < 1) fail_arg("eval.kmeans_iters: must be positive");

  c.output_path = r.str("output.path", "results.csv");
  c.checkpoint_path = r.str("output.checkpoint", "");

  r.reject_unknown();
  return c;
}

KeyValues config_to_key_values(const ExperimentConfig& c) {
  KeyValues kv;
  kv["seed"] = std::to_string(c.seed);
  kv["data.file"] = c.data.file;
  kv["data.test_file"] = c.data.test_file;
  kv["data.synth_classes"] = std::to_string(c.data.synth_classes);
  kv["data.synth_per_class"] = std::to_string(c.data.synth_per_class);
  kv["data.synth_test_per_class"] = std::to_string(c.data.synth_test_per_class);
  kv["data.synth_dim"] = std::to_string(c.data.synth_dim);
  kv["data.synth_separation"] = fmt_full(c.data.synth_separation);
  kv["data.synth_seed"] = std::to_string(c.data.synth_seed);
  kv["noise.kind"] = noise_name(c.noise.kind);
  kv["noise.delta"] = fmt_full(c.noise.delta);
  kv["noise.seed"] = std::to_string(c.noise.seed);
  kv["noise.map"] = noise_map_to_string(c.noise.transition_map);
  kv["loss.local"] = local_name(c.loss.local);
  kv["loss.discrepancy"] = discrepancy_name(c.loss.discrepancy);
  kv["loss.lambda"] = fmt_full(c.loss.lambda);
  kv["loss.lambda_xent"] = fmt_full(c.loss.lambda_xent);
  kv["loss.lambda_ang"] = fmt_full(c.loss.lambda_ang);
  kv["loss.tau"] = fmt_full(c.loss.tau);
  kv["loss.alpha_degrees"] = fmt_full(c.loss.alpha_degrees);
  kv["loss.use_xent"] = c.loss.use_xent ? "true" : "false";
  kv["loss.sigma"] = fmt_full(c.sigma);
  kv["loss.epsilon"] = fmt_full(c.sinkhorn.epsilon);
  kv["loss.sinkhorn_max_iterations"] = std::to_string(c.sinkhorn.max_iterations);
  kv["loss.sinkhorn_tolerance"] = fmt_full(c.sinkhorn.tolerance);
  kv["loss.sinkhorn_log_domain"] = c.sinkhorn.log_domain ? "true" : "false";
  kv["model.hidden_dim"] = std::to_string(c.model.hidden_dim);
  kv["model.embedding_dim"] = std::to_string(c.model.embedding_dim);
  kv["model.seed"] = std::to_string(c.model.seed);
  kv["opt.kind"] = c.opt.kind == OptKind::Adam ? "adam" : "sgd_momentum";
  kv["opt.learning_rate"] = fmt_full(c.opt.learning_rate);
  kv["opt.momentum"] = fmt_full(c.opt.momentum);
  kv["opt.beta1"] = fmt_full(c.opt.beta1);
  kv["opt.beta2"] = fmt_full(c.opt.beta2);
  kv["opt.decay_factor"] = fmt_full(c.opt.decay_factor);
  kv["opt.decay_every"] = std::to_string(c.opt.decay_every);
  kv["opt.epochs"] = std::to_string(c.opt.epochs);
  kv["opt.xent_warmup_epochs"] = std::to_string(c.opt.xent_warmup_epochs);
  kv["opt.seed"] = std::to_string(c.opt.seed);
  kv["train.r"] = std::to_string(c.r);
  kv["train.batch_size"] = std::to_string(c.batch_size);
  kv["eval.ks"] = int_list_to_string(c.eval.ks);
  kv["eval.probe_epochs"] = std::to_string(c.eval.probe_epochs);
  kv["eval.probe_lr"] = fmt_full(c.eval.probe_lr);
  kv["eval.kmeans_seed"] = std::to_string(c.eval.kmeans_seed);
  kv["eval.kmeans_iters"] = std::to_string(c.eval.kmeans_iters);
  kv["output.path"] = c.output_path;
  kv["output.checkpoint"] = c.checkpoint_path;
  return kv;
}

KeyValues load_config_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_arg("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (text.rfind("# otml-results", 0) == 0) {
    // Extract the resolved-config header lines; skip result payload lines.
    std::istringstream lines(text);
    std::string line, extracted;
    while (std::getline(lines, line)) {
      if (line.rfind("# ", 0) != 0) continue;
      const std::string body = line.substr(2);
      if (body.rfind("otml-results", 0) == 0 || body.rfind("columns:", 0) == 0 ||
          body.rfind("result.", 0) == 0)
        continue;
      if (body.find('=') != std::string::npos) extracted += body + "\n";
    }
    return parse_key_values(extracted);
  }
  return parse_key_values(text);
}

ExperimentConfig load_config_file(const std::string& path) {
  return resolve_config(load_config_key_values(path));
}

}  // namespace otml
