// Command-line front end: optimal transport reports, discrepancy values,
// label-noise application, embedding training, checkpoint evaluation, and
// the built-in selftest. Exit codes: 0 success, 1 usage or config error,
// 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otml/config.hpp"
#include "otml/discrepancy.hpp"
#include "otml/exact_transport.hpp"
#include "otml/selftest.hpp"

namespace {

using namespace otml;

Matrix parse_points_text(const std::string& text, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    if (line[b] == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
      if (errno || end == field.c_str() || *end != '\0')
        fail_arg(what + ": bad number '" + field + "'");
      row.push_back(v);
    }
    if (row.empty()) fail_arg(what + ": empty row");
    if (!rows.empty() && rows.back().size() != row.size())
      fail_arg(what + ": rows have inconsistent dimension");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail_arg(what + ": no points");
  Matrix m(Index(rows.size()), Index(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(Index(i), Index(j)) = rows[i][j];
  return m;
}

Matrix load_points(const std::string& file, const std::string& inline_points,
                   const std::string& side) {
  if (!file.empty() && !inline_points.empty())
    fail_arg(side + ": give either a file or inline points, not both");
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) fail_arg(side + ": cannot open " + file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_points_text(buf.str(), side);
  }
  if (!inline_points.empty()) {
    std::string text = inline_points;
    for (char& c : text)
      if (c == ';') c = '\n';
    return parse_points_text(text, side);
  }
  fail_arg(side + ": no points given (use --" + side + " or --" + side + "-points)");
}

struct OtFlags {
  std::string a_file, b_file, a_inline, b_inline;
  double p = 2.0, scale = 0.5;
  SinkhornConfig cfg;
  bool direct = false;
};

void run_ot(const OtFlags& f) {
  SinkhornConfig cfg = f.cfg;
  cfg.log_domain = !f.direct;
  DiscreteDistribution a = make_distribution(load_points(f.a_file, f.a_inline, "a"));
  DiscreteDistribution b = make_distribution(load_points(f.b_file, f.b_inline, "b"));
  CostMatrix cost = pairwise_cost(a, b, f.p, f.scale);

  TransportPlan plan = sinkhorn(a, b, cost, cfg);
  if (!plan.converged)
    fail_num("sinkhorn did not converge within " + std::to_string(cfg.max_iterations) +
             " iterations (marginal violation " + fmt_short(max_marginal_violation(plan)) + ")");
  SinkhornDivergenceDetail sd = sinkhorn_divergence_detail(a, b, f.p, f.scale, cfg);
  if (!sd.all_converged) fail_num("a self-term solve did not converge; raise --max-iterations");

  std::ostringstream out;
  out << "# otml-ot\n";
  out << "# epsilon=" << fmt_full(cfg.epsilon) << "\n";
  out << "# p=" << fmt_full(f.p) << "\n";
  out << "# scale=" << fmt_full(f.scale) << "\n";
  out << "# tolerance=" << fmt_full(cfg.tolerance) << "\n";
  out << "# max_iterations=" << cfg.max_iterations << "\n";
  out << "# log_domain=" << (cfg.log_domain ? "true" : "false") << "\n";
  if (a.supports.rows() * b.supports.rows() <= 400) {
    ExactOtResult exact = exact_ot(a, b, cost);
    out << "exact_cost=" << fmt_full(exact.cost) << "\n";
  }
  out << "sinkhorn_cost=" << fmt_full(transport_cost(plan, cost)) << "\n";
  out << "sinkhorn_divergence=" << fmt_full(sd.value) << "\n";
  out << "iterations=" << plan.iterations_used << "\n";
  out << "marginal_violation=" << fmt_full(max_marginal_violation(plan)) << "\n";
  std::cout << out.str();
}

struct DivergenceFlags {
  std::string a_file, b_file, a_inline, b_inline;
  std::string kind = "all";
  double p = 2.0, scale = 0.5, sigma = 0.05;
  SinkhornConfig cfg;
};

void run_divergence(const DivergenceFlags& f) {
  DiscreteDistribution a = make_distribution(load_points(f.a_file, f.a_inline, "a"));
  DiscreteDistribution b = make_distribution(load_points(f.b_file, f.b_inline, "b"));

  std::ostringstream out;
  out << "# otml-divergence\n";
  out << "# sigma=" << fmt_full(f.sigma) << "\n";
  out << "# epsilon=" << fmt_full(f.cfg.epsilon) << "\n";
  out << "# p=" << fmt_full(f.p) << "\n";
  out << "# scale=" << fmt_full(f.scale) << "\n";

  const bool all = f.kind == "all";
  if (all || f.kind == "mmd_laplacian") {
    DiscrepancyKind k;
    k.kind = Discrepancy::MMD_Laplacian;
    k.sigma = f.sigma;
    out << "mmd_laplacian=" << fmt_full(mmd(a, b, k)) << "\n";
  }
  if (all || f.kind == "mmd_gaussian") {
    DiscrepancyKind k;
    k.kind = Discrepancy::MMD_Gaussian;
    k.sigma = f.sigma;
    out << "mmd_gaussian=" << fmt_full(mmd(a, b, k)) << "\n";
  }
  if (all || f.kind == "energy") {
    out << "energy_distance=" << fmt_full(energy_distance(a, b, f.p, f.scale)) << "\n";
  }
  if (all || f.kind == "wasserstein") {
    DiscrepancyKind k;
    k.kind = Discrepancy::Wasserstein;
    k.sinkhorn = f.cfg;
    out << "wasserstein=" << fmt_full(phi(a, b, k)) << "\n";
  }
  if (all || f.kind == "sinkhorn") {
    SinkhornDivergenceDetail sd = sinkhorn_divergence_detail(a, b, f.p, f.scale, f.cfg);
    if (!sd.all_converged)
      fail_num("sinkhorn divergence solves did not converge; raise --max-iterations");
    out << "sinkhorn_divergence=" << fmt_full(sd.value) << "\n";
  }
  std::cout << out.str();
}

struct NoiseFlags {
  std::string in_file, out_file;
  std::string kind = "symmetric";
  double delta = 0.0;
  std::uint64_t seed = 1;
  std::string map;
  bool map_given = false;
};

void run_noise(const NoiseFlags& f) {
  Dataset ds = load_dataset(f.in_file);
  NoiseSpec spec;
  if (f.kind == "clean")
    spec.kind = NoiseKind::Clean;
  else if (f.kind == "symmetric")
    spec.kind = NoiseKind::Symmetric;
  else if (f.kind == "asymmetric")
    spec.kind = NoiseKind::Asymmetric;
  else
    fail_arg("--kind: unknown noise kind '" + f.kind + "'");
  spec.delta = f.delta;
  spec.seed = f.seed;
  if (f.map_given)
    spec.transition_map = parse_transition_map(f.map);
  else if (spec.kind == NoiseKind::Asymmetric)
    spec.transition_map = default_asymmetric_map();

  NoiseResult nr = inject_noise(ds.labels, spec, ds.num_classes);
  long changed = 0;
  for (char c : nr.corruption_mask) changed += c;

  std::ostringstream out;
  out << "# otml-noise\n";
  out << "# kind=" << f.kind << "\n";
  out << "# delta=" << fmt_full(f.delta) << "\n";
  out << "# seed=" << f.seed << "\n";
  out << "rows=" << ds.size() << "\n";
  out << "changed=" << changed << "\n";
  out << "changed_fraction=" << fmt_full(double(changed) / double(ds.size())) << "\n";
  std::cout << out.str();

  if (!f.out_file.empty()) {
    Dataset noisy = ds;
    noisy.labels = nr.labels;
    save_dataset(noisy, f.out_file);
    std::cout << "written=" << f.out_file << "\n";
  }
}

EmbeddingBatch embed_dataset(const EmbeddingModel& model, const Dataset& ds,
                             const std::vector<int>& labels, int num_classes) {
  return model_forward(model, ds.features, labels, num_classes);
}

EvalReport evaluate_model(const EmbeddingModel& model, const Dataset& fit,
                          const std::vector<int>& fit_labels, const Dataset& test,
                          const EvalSpec& spec) {
  const int num_classes = std::max(fit.num_classes, test.num_classes);
  EmbeddingBatch fit_z = embed_dataset(model, fit, fit_labels, num_classes);
  EmbeddingBatch test_z = embed_dataset(model, test, test.labels, num_classes);

  EvalReport rep;
  rep.accuracy = linear_probe(fit_z.vectors, fit_labels, test_z.vectors, test.labels,
                              spec.probe_epochs, spec.probe_lr);
  const std::vector<int> clusters =
      kmeans(test_z.vectors, test.num_classes, spec.kmeans_seed, spec.kmeans_iters);
  rep.nmi = nmi(clusters, test.labels);
  rep.recall_at = recall_at_k(test_z.vectors, test.labels, spec.ks);
  return rep;
}

void split_synth(const ExperimentConfig& cfg, Dataset& train_out, Dataset& test_out) {
  const int per_train = cfg.data.synth_per_class;
  const int per_test = cfg.data.synth_test_per_class;
  const int total = per_train + per_test;
  Dataset all = synth_gaussian_mixture(cfg.data.synth_classes, total, cfg.data.synth_dim,
                                       cfg.data.synth_separation, cfg.data.synth_seed);
  const int k = cfg.data.synth_classes;
  auto carve = [&](int offset, int count) {
    Dataset d;
    d.num_classes = k;
    d.features.resize(Index(k) * count, all.dim());
    d.labels.resize(std::size_t(k) * count);
    Index row = 0;
    for (int c = 0; c < k; ++c)
      for (int i = 0; i < count; ++i) {
        const Index src = Index(c) * total + offset + i;
        d.features.row(row) = all.features.row(src);
        d.labels[std::size_t(row)] = all.labels[std::size_t(src)];
        ++row;
      }
    return d;
  };
  train_out = carve(0, per_train);
  test_out = carve(per_train, per_test);
  test_out.split = Split::Test;
}

void load_splits(ExperimentConfig& cfg, Dataset& train_out, Dataset& test_out) {
  if (cfg.data.file.empty()) {
    split_synth(cfg, train_out, test_out);
    return;
  }
  train_out = load_dataset(cfg.data.file);
  if (cfg.data.test_file.empty()) {
    test_out = train_out;
  } else {
    test_out = load_dataset(cfg.data.test_file);
    if (test_out.dim() != train_out.dim())
      fail_arg("data.test_file: feature dim differs from data.file");
  }
  const int k = std::max(train_out.num_classes, test_out.num_classes);
  train_out.num_classes = k;
  test_out.num_classes = k;
  test_out.split = Split::Test;
}

struct TrainFlags {
  std::string config_path;
  std::vector<std::string> overrides;
};

void write_results_file(const ExperimentConfig& cfg, const TrainResult& tr,
                        const EvalReport& rep) {
  std::ostringstream out;
  out << "# otml-results\n";
  for (const auto& [k, v] : config_to_key_values(cfg)) out << "# " << k << "=" << v << "\n";
  out << "# columns: epoch,lr,total,local,phi,xent\n";
  for (const EpochLog& e : tr.log)
    out << e.epoch << ',' << fmt_full(e.lr) << ',' << fmt_full(e.total) << ','
        << fmt_full(e.local_part) << ',' << fmt_full(e.phi_part) << ','
        << fmt_full(e.xent_part) << "\n";
  out << "# result.accuracy=" << fmt_full(rep.accuracy) << "\n";
  out << "# result.nmi=" << fmt_full(rep.nmi) << "\n";
  for (const auto& [k, v] : rep.recall_at)
    out << "# result.recall_at_" << k << "=" << fmt_full(v) << "\n";

  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) fail_arg("cannot open output file: " + cfg.output_path);
  file << out.str();
}

void run_train(const TrainFlags& f) {
  KeyValues kv = load_config_key_values(f.config_path);
  for (const std::string& ov : f.overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) fail_arg("--set expects key=value, got '" + ov + "'");
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  ExperimentConfig cfg = resolve_config(kv);

  Dataset train_set, test_set;
  load_splits(cfg, train_set, test_set);
  cfg.model.input_dim = int(train_set.dim());
  if (cfg.batch_size == 0) cfg.batch_size = train_set.num_classes * cfg.r;

  TrainResult tr =
      train(train_set, cfg.model, cfg.loss, cfg.opt, cfg.noise, cfg.batch_size, cfg.r);
  EvalReport rep = evaluate_model(tr.model, train_set, tr.noisy_labels, test_set, cfg.eval);
  write_results_file(cfg, tr, rep);
  if (!cfg.checkpoint_path.empty()) save_checkpoint(tr.model, cfg.checkpoint_path);

  std::cout << serialize_report(rep);
  std::cout << "results=" << cfg.output_path << "\n";
}

struct EvalFlags {
  std::string checkpoint, data_file, test_file;
  std::string ks = "1,2,4";
  EvalSpec spec;
};

void run_eval(const EvalFlags& f) {
  EmbeddingModel model = load_checkpoint(f.checkpoint);
  Dataset fit = load_dataset(f.data_file);
  Dataset test = f.test_file.empty() ? fit : load_dataset(f.test_file);
  const int k = std::max(fit.num_classes, test.num_classes);
  fit.num_classes = k;
  test.num_classes = k;
  EvalSpec spec = f.spec;
  spec.ks = parse_int_list_arg(f.ks);
  EvalReport rep = evaluate_model(model, fit, fit.labels, test, spec);
  std::cout << serialize_report(rep);
}

int run_selftest_cmd(double perturb) {
  otml::testing::kernel_perturbation = perturb;
  const std::vector<CheckResult> results = run_selftest();
  int failed = 0;
  for (const CheckResult& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << "passed " << (results.size() - std::size_t(failed)) << "/" << results.size()
            << " checks\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-wise discrepancy toolkit: entropic transport, kernel "
               "discrepancies, metric losses, label noise, and a toy trainer"};
  app.require_subcommand(1);

  OtFlags ot;
  auto* ot_cmd = app.add_subcommand("ot", "Solve entropic transport between two point sets");
  ot_cmd->add_option("--a", ot.a_file, "CSV file of points for side a");
  ot_cmd->add_option("--b", ot.b_file, "CSV file of points for side b");
  ot_cmd->add_option("--a-points", ot.a_inline, "inline points, e.g. '0,0;1,0'");
  ot_cmd->add_option("--b-points", ot.b_inline, "inline points");
  ot_cmd->add_option("--epsilon", ot.cfg.epsilon, "entropy weight")->capture_default_str();
  ot_cmd->add_option("--p", ot.p, "cost exponent")->capture_default_str();
  ot_cmd->add_option("--scale", ot.scale, "cost scale")->capture_default_str();
  ot_cmd->add_option("--tolerance", ot.cfg.tolerance, "marginal tolerance")->capture_default_str();
  ot_cmd->add_option("--max-iterations", ot.cfg.max_iterations, "sweep budget")->capture_default_str();
  ot_cmd->add_flag("--direct", ot.direct, "use the direct-domain solver");

  DivergenceFlags dv;
  auto* dv_cmd = app.add_subcommand("divergence", "Discrepancies between two point sets");
  dv_cmd->add_option("--a", dv.a_file, "CSV file of points for side a");
  dv_cmd->add_option("--b", dv.b_file, "CSV file of points for side b");
  dv_cmd->add_option("--a-points", dv.a_inline, "inline points");
  dv_cmd->add_option("--b-points", dv.b_inline, "inline points");
  dv_cmd->add_option("--kind", dv.kind,
                     "all|mmd_laplacian|mmd_gaussian|energy|wasserstein|sinkhorn")->capture_default_str();
  dv_cmd->add_option("--sigma", dv.sigma, "kernel bandwidth")->capture_default_str();
  dv_cmd->add_option("--epsilon", dv.cfg.epsilon, "entropy weight")->capture_default_str();
  dv_cmd->add_option("--p", dv.p, "cost exponent")->capture_default_str();
  dv_cmd->add_option("--scale", dv.scale, "cost scale")->capture_default_str();
  dv_cmd->add_option("--tolerance", dv.cfg.tolerance, "marginal tolerance")->capture_default_str();
  dv_cmd->add_option("--max-iterations", dv.cfg.max_iterations, "sweep budget")->capture_default_str();

  NoiseFlags nz;
  auto* nz_cmd = app.add_subcommand("noise", "Apply label noise to a dataset file");
  nz_cmd->add_option("--in", nz.in_file, "input dataset CSV")->required();
  nz_cmd->add_option("--out", nz.out_file, "write the noisy dataset here");
  nz_cmd->add_option("--kind", nz.kind, "clean|symmetric|asymmetric")->capture_default_str();
  nz_cmd->add_option("--delta", nz.delta, "corruption probability")->capture_default_str();
  nz_cmd->add_option("--seed", nz.seed, "noise seed")->capture_default_str();
  auto* map_opt = nz_cmd->add_option("--map", nz.map, "asymmetric transitions, e.g. '9:1,2:0'");

  TrainFlags tf;
  auto* tr_cmd = app.add_subcommand("train", "Train an embedding model from a config file");
  tr_cmd->add_option("--config", tf.config_path, "key=value config file")->required();
  tr_cmd->add_option("--set", tf.overrides, "override a config key (key=value, repeatable)");

  EvalFlags ev;
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on datasets");
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
  ev_cmd->add_option("--data", ev.data_file, "probe-fit dataset CSV")->required();
  ev_cmd->add_option("--test", ev.test_file, "test dataset CSV (default: --data)");
  ev_cmd->add_option("--ks", ev.ks, "recall cutoffs")->capture_default_str();
  ev_cmd->add_option("--probe-epochs", ev.spec.probe_epochs, "probe epochs")->capture_default_str();
  ev_cmd->add_option("--probe-lr", ev.spec.probe_lr, "probe learning rate")->capture_default_str();
  ev_cmd->add_option("--kmeans-seed", ev.spec.kmeans_seed, "kmeans seed")->capture_default_str();
  ev_cmd->add_option("--kmeans-iters", ev.spec.kmeans_iters, "kmeans iterations")->capture_default_str();

  double perturb = 0.0;
  auto* st_cmd = app.add_subcommand("selftest", "Run the built-in invariant suite");
  st_cmd->add_option("--perturb-kernel", perturb,
                     "multiply kernel values by (1+p); nonzero must fail a check")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nz.map_given = map_opt->count() > 0;

  try {
    if (ot_cmd->parsed()) run_ot(ot);
    if (dv_cmd->parsed()) run_divergence(dv);
    if (nz_cmd->parsed()) run_noise(nz);
    if (tr_cmd->parsed()) run_train(tf);
    if (ev_cmd->parsed()) run_eval(ev);
    if (st_cmd->parsed()) return run_selftest_cmd(perturb);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
