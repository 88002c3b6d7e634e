#include "otml/selftest.hpp"

#include <cmath>
#include <functional>

#include "otml/discrepancy.hpp"
#include "otml/eval.hpp"
#include "otml/exact_transport.hpp"
#include "otml/losses.hpp"
#include "otml/transport.hpp"

namespace otml {

namespace {

DiscreteDistribution rand_dist(Rng& rng, int n, int dim, bool uniform) {
  Matrix pts(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) pts(i, j) = rng.uniform();
  if (uniform) return make_distribution(pts);
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = 0.05 + rng.uniform();
  return make_distribution(pts, w);
}

EmbeddingBatch rand_batch(Rng& rng, const std::vector<int>& labels, int dim, int num_classes) {
  Matrix z(Index(labels.size()), dim);
  for (Index i = 0; i < z.rows(); ++i) {
    for (int j = 0; j < dim; ++j) z(i, j) = rng.normal();
    z.row(i) /= z.row(i).norm();
  }
  return make_embedding_batch(z, labels, num_classes);
}

DiscreteDistribution point_dist(std::initializer_list<double> xs) {
  Matrix pts(Index(xs.size()), 1);
  Index i = 0;
  for (double x : xs) pts(i++, 0) = x;
  return make_distribution(pts);
}

struct Harness {
  std::vector<CheckResult> results;

  void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult r;
    r.name = name;
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
};

}  // namespace

std::vector<CheckResult> run_selftest() {
  Harness h;

  h.check("sinkhorn_marginals", [] {
    Rng rng(11);
    double worst = 0.0;
    for (double eps : {2.5e-3, 0.1, 1.0}) {
      DiscreteDistribution a = rand_dist(rng, 6, 2, false);
      DiscreteDistribution b = rand_dist(rng, 6, 2, true);
      CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
      SinkhornConfig cfg;
      cfg.epsilon = eps;
      cfg.max_iterations = 400000;
      TransportPlan plan = sinkhorn(a, b, cost, cfg);
      if (!plan.converged) return std::pair(false, "no convergence at epsilon " + fmt_short(eps));
      worst = std::max(worst, max_marginal_violation(plan));
    }
    return std::pair(worst <= 1e-6, "max L1 violation " + fmt_short(worst));
  });

  h.check("forced_plan_cost", [] {
    DiscreteDistribution a = point_dist({0.0, 1.0});
    DiscreteDistribution b = point_dist({2.0});
    CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
    SinkhornConfig cfg;
    TransportPlan plan = sinkhorn(a, b, cost, cfg);
    const double c = transport_cost(plan, cost);
    return std::pair(plan.converged && std::abs(c - 1.25) <= 1e-9,
                     "cost " + fmt_full(c) + " expected 1.25");
  });

  h.check("exact_ot_hand", [] {
    DiscreteDistribution a = point_dist({0.0, 1.0});
    DiscreteDistribution b = point_dist({3.0, 4.0});
    ExactOtResult r = exact_ot(a, b, pairwise_cost(a, b, 2.0, 0.5));
    return std::pair(std::abs(r.cost - 4.5) <= 1e-12, "cost " + fmt_full(r.cost) + " expected 4.5");
  });

  h.check("exact_below_entropic", [] {
    Rng rng(12);
    DiscreteDistribution a = rand_dist(rng, 5, 2, false);
    DiscreteDistribution b = rand_dist(rng, 7, 2, true);
    CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
    ExactOtResult ex = exact_ot(a, b, cost);
    SinkhornConfig cfg;
    cfg.epsilon = 0.05;
    TransportPlan plan = sinkhorn(a, b, cost, cfg);
    const double sc = transport_cost(plan, cost);
    return std::pair(ex.cost <= sc + 1e-9,
                     "exact " + fmt_short(ex.cost) + " entropic " + fmt_short(sc));
  });

  h.check("epsilon_zero_limit", [] {
    Rng rng(13);
    DiscreteDistribution a = rand_dist(rng, 5, 2, true);
    DiscreteDistribution b = rand_dist(rng, 5, 2, true);
    CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
    ExactOtResult ex = exact_ot(a, b, cost);
    SinkhornConfig cfg;
    cfg.epsilon = 1e-3 * cost.entries.maxCoeff();
    cfg.max_iterations = 800000;
    TransportPlan plan = sinkhorn(a, b, cost, cfg);
    const double sc = transport_cost(plan, cost);
    const double rel = std::abs(sc - ex.cost) / std::max(1e-12, std::abs(ex.cost));
    return std::pair(plan.converged && rel <= 0.01, "relative gap " + fmt_short(rel));
  });

  h.check("epsilon_inf_limit", [] {
    Rng rng(14);
    DiscreteDistribution a = rand_dist(rng, 4, 2, true);
    DiscreteDistribution b = rand_dist(rng, 5, 2, true);
    SinkhornConfig cfg;
    cfg.epsilon = 1e6;
    const double sd = sinkhorn_divergence(a, b, 2.0, 0.5, cfg);
    const double ed = energy_distance(a, b, 2.0, 0.5);
    const double rel = std::abs(sd - ed) / std::max(1e-12, std::abs(ed));
    return std::pair(rel <= 1e-4, "relative gap " + fmt_short(rel));
  });

  h.check("kernel_duality", [] {
    Rng rng(15);
    DiscreteDistribution a = rand_dist(rng, 4, 3, true);
    DiscreteDistribution b = rand_dist(rng, 5, 3, true);
    const double ed = energy_distance(a, b, 2.0, 0.5);
    // Expansion of the squared MMD with kernel -cost, uniform averaging.
    const Matrix cab = pairwise_cost(a, b, 2.0, 0.5).entries;
    const Matrix caa = pairwise_cost(a, a, 2.0, 0.5).entries;
    const Matrix cbb = pairwise_cost(b, b, 2.0, 0.5).entries;
    const double expansion =
        2.0 * cab.mean() - caa.mean() - cbb.mean();  // = mmd form of kernel -cost
    const double gap = std::abs(ed - 0.5 * expansion);
    return std::pair(gap <= 1e-12, "gap " + fmt_short(gap));
  });

  h.check("mmd_hand_values", [] {
    const double expected = 2.0 - 2.0 * std::exp(-1.0);
    DiscrepancyKind lap;
    lap.kind = Discrepancy::MMD_Laplacian;
    lap.sigma = 0.05;
    DiscreteDistribution a = point_dist({0.0});
    DiscreteDistribution b = point_dist({0.05});  // one bandwidth apart
    const double lap_val = mmd(a, b, lap);

    DiscrepancyKind gau;
    gau.kind = Discrepancy::MMD_Gaussian;
    gau.sigma = 0.05;
    DiscreteDistribution c = point_dist({0.05 * std::sqrt(2.0)});  // exponent -1
    const double gau_val = mmd(a, c, gau);

    const double gap =
        std::max(std::abs(lap_val - expected), std::abs(gau_val - expected));
    return std::pair(gap <= 1e-12, "gap to 2-2/e " + fmt_short(gap));
  });

  h.check("mmd_gradient_fd", [] {
    Rng rng(16);
    EmbeddingBatch batch = rand_batch(rng, {0, 0, 0, 1, 1, 1}, 3, 2);
    DiscrepancyKind kind;
    kind.kind = Discrepancy::MMD_Laplacian;
    kind.sigma = 0.5;
    ValueGrad vg = dcdl_loss(batch, kind);
    const double hstep = 1e-5;
    double worst = 0.0;
    for (Index i = 0; i < batch.vectors.rows(); ++i)
      for (Index j = 0; j < batch.vectors.cols(); ++j) {
        EmbeddingBatch pl = batch, mi = batch;
        pl.vectors(i, j) += hstep;
        mi.vectors(i, j) -= hstep;
        const double fd = (dcdl_loss(pl, kind).value - dcdl_loss(mi, kind).value) / (2 * hstep);
        const double denom = std::max({1e-8, std::abs(fd), std::abs(vg.gradient(i, j))});
        worst = std::max(worst, std::abs(fd - vg.gradient(i, j)) / denom);
      }
    return std::pair(worst <= 1e-4, "max relative gradient error " + fmt_short(worst));
  });

  h.check("triplet_oracle", [] {
    Rng rng(17);
    EmbeddingBatch batch = rand_batch(rng, {0, 0, 0, 1, 1, 2, 2, 2}, 4, 3);
    const double tau = 0.5;
    ValueGrad vg = triplet_loss(batch, tau);
    // Brute force over ordered same-class pairs with the mining rule.
    const Matrix d2 = pairwise_sq_dist(batch.vectors, batch.vectors);
    double total = 0.0;
    long pairs = 0;
    const Index n = batch.vectors.rows();
    for (Index a = 0; a < n; ++a)
      for (Index p = 0; p < n; ++p) {
        if (a == p || batch.labels[a] != batch.labels[p]) continue;
        ++pairs;
        Index best = -1;
        bool semi = false;
        for (Index neg = 0; neg < n; ++neg) {
          if (batch.labels[neg] == batch.labels[a]) continue;
          const bool is_semi = d2(a, neg) > d2(a, p);
          if (best < 0 || (is_semi && !semi) ||
              (is_semi == semi && d2(a, neg) < d2(a, best)))
            best = neg, semi = is_semi;
        }
        total += std::max(0.0, d2(a, p) - d2(a, best) + tau);
      }
    total /= double(pairs);
    const double gap = std::abs(total - vg.value);
    return std::pair(gap <= 1e-12, "gap " + fmt_short(gap));
  });

  h.check("npairs_oracle", [] {
    Rng rng(18);
    EmbeddingBatch batch = rand_batch(rng, {0, 0, 1, 1, 2, 2}, 4, 3);
    ValueGrad vg = npairs_loss(batch);
    const Index n = batch.vectors.rows();
    double total = 0.0;
    for (Index a = 0; a < n; ++a) {
      Index pos = -1;
      for (Index step = 1; step <= n; ++step) {
        const Index cand = (a + step) % n;
        if (cand != a && batch.labels[cand] == batch.labels[a]) {
          pos = cand;
          break;
        }
      }
      double s = 0.0;
      for (Index neg = 0; neg < n; ++neg)
        if (batch.labels[neg] != batch.labels[a])
          s += std::exp(batch.vectors.row(a).dot(batch.vectors.row(neg)) -
                        batch.vectors.row(a).dot(batch.vectors.row(pos)));
      total += std::log(1.0 + s);
    }
    total /= double(n);
    const double gap = std::abs(total - vg.value);
    return std::pair(gap <= 1e-12, "gap " + fmt_short(gap));
  });

  h.check("metric_sanity", [] {
    const std::vector<int> a = {0, 0, 1, 1, 2, 2};
    const std::vector<int> b = {1, 1, 0, 0, 2, 2};
    if (std::abs(nmi(a, a) - 1.0) > 1e-12) return std::pair(false, std::string("nmi(a,a) != 1"));
    if (std::abs(nmi(a, b) - 1.0) > 1e-12)
      return std::pair(false, std::string("nmi permutation invariance broke"));
    const std::vector<int> constant(6, 0);
    if (nmi(a, constant) != 0.0) return std::pair(false, std::string("nmi constant != 0"));

    Rng rng(19);
    Matrix pts(8, 2);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 2; ++j) pts(i, j) = rng.uniform();
    const std::vector<int> labels = {0, 0, 1, 1, 0, 1, 0, 1};
    auto rec = recall_at_k(pts, labels, {1, 2, 4, 6});
    double prev = 0.0;
    for (const auto& [k, v] : rec) {
      if (v + 1e-15 < prev) return std::pair(false, "recall not monotone at k=" + std::to_string(k));
      prev = v;
    }

    const double w = welch_t(1.0, 1.0, 4, 0.0, 1.0, 4);
    if (std::abs(w - 1.0 / std::sqrt(0.5)) > 1e-6)
      return std::pair(false, "welch_t hand value off: " + fmt_full(w));
    if (w + welch_t(0.0, 1.0, 4, 1.0, 1.0, 4) != 0.0)
      return std::pair(false, std::string("welch_t not antisymmetric"));
    return std::pair(true, std::string("nmi, recall, welch_t all consistent"));
  });

  h.check("probe_separated", [] {
    Rng rng(20);
    Matrix z(40, 2);
    std::vector<int> y(40);
    for (Index i = 0; i < 40; ++i) {
      const int cls = i < 20 ? 0 : 1;
      y[i] = cls;
      z(i, 0) = (cls ? 3.0 : -3.0) + 0.1 * rng.normal();
      z(i, 1) = 0.1 * rng.normal();
    }
    const double acc = linear_probe(z, y, z, y, 100, 0.5);
    return std::pair(acc >= 0.99, "train accuracy " + fmt_short(acc));
  });

  return h.results;
}

}  // namespace otml
