#include "otml/transport.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace otml;

namespace {

DiscreteDistribution points1d(std::initializer_list<double> xs) {
  Matrix m(Index(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return make_distribution(m);
}

struct RandomInstance {
  DiscreteDistribution a, b;
  CostMatrix cost;
};

RandomInstance random_instance(Index n, Index m, Index dim, std::uint64_t seed,
                               bool random_weights) {
  Rng rng(seed);
  RandomInstance inst;
  Matrix pa = testutil::unit_rows(n, dim, rng);
  Matrix pb = testutil::unit_rows(m, dim, rng);
  if (random_weights) {
    Vector wa(n), wb(m);
    for (Index i = 0; i < n; ++i) wa[i] = 0.1 + rng.uniform();
    for (Index j = 0; j < m; ++j) wb[j] = 0.1 + rng.uniform();
    inst.a = make_distribution(pa, wa);
    inst.b = make_distribution(pb, wb);
  } else {
    inst.a = make_distribution(pa);
    inst.b = make_distribution(pb);
  }
  inst.cost = pairwise_cost(inst.a, inst.b, 2.0, 0.5);
  return inst;
}

// Plain direct-domain reference: c starts at ones, rows rescale first.
Matrix reference_plan(const Vector& w, const Vector& wt, const Matrix& D, double eps,
                      int sweeps) {
  Matrix K = (-D / eps).array().exp().matrix();
  Vector r = Vector::Ones(D.rows()), c = Vector::Ones(D.cols());
  for (int s = 0; s < sweeps; ++s) {
    Vector kc = K * c;
    for (Index i = 0; i < D.rows(); ++i) r[i] = w[i] / kc[i];
    Vector kr = K.transpose() * r;
    for (Index j = 0; j < D.cols(); ++j) c[j] = wt[j] / kr[j];
  }
  return r.asDiagonal() * K * c.asDiagonal();
}

}  // namespace

TEST_CASE("sinkhorn 1x1 converges to the forced plan in one sweep") {
  DiscreteDistribution a = points1d({0.0}), b = points1d({3.0});
  SinkhornConfig cfg;
  TransportPlan plan = sinkhorn(a, b, pairwise_cost(a, b, 2.0, 0.5), cfg);
  CHECK(plan.converged);
  CHECK(plan.iterations_used == 1);
  CHECK(plan.coupling(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sinkhorn marginals force the two-to-one plan at any epsilon") {
  DiscreteDistribution a = points1d({0.0, 1.0}), b = points1d({2.0});
  CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
  for (double eps : {2.5e-3, 0.1, 1.0}) {
    SinkhornConfig cfg;
    cfg.epsilon = eps;
    TransportPlan plan = sinkhorn(a, b, cost, cfg);
    CHECK(plan.converged);
    CHECK(plan.coupling(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(plan.coupling(1, 0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(transport_cost(plan, cost) == doctest::Approx(1.25).epsilon(1e-10));
  }
}

TEST_CASE("direct domain reports underflow at tiny epsilon") {
  DiscreteDistribution a = points1d({0.0, 1.0}), b = points1d({2.0});
  CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
  SinkhornConfig cfg;
  cfg.epsilon = 2.5e-3;
  cfg.log_domain = false;
  CHECK_THROWS_AS(sinkhorn(a, b, cost, cfg), std::runtime_error);
}

TEST_CASE("transport_cost hand values") {
  TransportPlan one;
  one.coupling = Matrix::Constant(1, 1, 1.0);
  one.row_marginal = Vector::Constant(1, 1.0);
  one.col_marginal = Vector::Constant(1, 1.0);
  CostMatrix two;
  two.entries = Matrix::Constant(1, 1, 2.0);
  CHECK(transport_cost(one, two) == 2.0);

  TransportPlan forced;
  forced.coupling.resize(2, 1);
  forced.coupling << 0.5, 0.5;
  forced.row_marginal = Vector::Constant(2, 0.5);
  forced.col_marginal = Vector::Constant(1, 1.0);
  CostMatrix c;
  c.entries.resize(2, 1);
  c.entries << 2.0, 0.5;
  CHECK(transport_cost(forced, c) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("identity coupling on identical points costs zero") {
  DiscreteDistribution d = points1d({0.0, 1.0});
  CostMatrix cost = pairwise_cost(d, d, 2.0, 0.5);
  TransportPlan plan;
  plan.coupling = Matrix::Identity(2, 2) * 0.5;
  plan.row_marginal = d.weights;
  plan.col_marginal = d.weights;
  CHECK(transport_cost(plan, cost) == 0.0);
}

TEST_CASE("regularized objective hand value and conventions") {
  TransportPlan plan;
  plan.coupling = Matrix::Constant(1, 1, 1.0);
  plan.row_marginal = Vector::Constant(1, 1.0);
  plan.col_marginal = Vector::Constant(1, 1.0);
  CostMatrix cost;
  cost.entries = Matrix::Constant(1, 1, 2.0);
  CHECK(regularized_objective(plan, cost, 0.1) == doctest::Approx(1.9).epsilon(1e-14));
  CHECK(regularized_objective(plan, cost, 0.0) == transport_cost(plan, cost));

  TransportPlan holey;
  holey.coupling.resize(2, 1);
  holey.coupling << 1.0, 0.0;  // zero entry contributes nothing
  holey.row_marginal = Vector::Constant(2, 0.5);
  holey.col_marginal = Vector::Constant(1, 1.0);
  CostMatrix c2;
  c2.entries.resize(2, 1);
  c2.entries << 1.0, 5.0;
  const double v = regularized_objective(holey, c2, 0.3);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1.0 + 0.3 * (std::log(1.0) - 1.0)).epsilon(1e-14));
}

TEST_CASE("update order matches the plain reference sweep for sweep") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    RandomInstance inst = random_instance(3, 4, 3, seed, seed % 2 == 0);
    SinkhornConfig cfg;
    cfg.epsilon = 0.7;
    cfg.max_iterations = 3;
    cfg.tolerance = 1e-300;  // never triggers: exactly 3 sweeps run
    Matrix want = reference_plan(inst.a.weights, inst.b.weights, inst.cost.entries, 0.7, 3);

    cfg.log_domain = false;
    TransportPlan direct = sinkhorn(inst.a, inst.b, inst.cost, cfg);
    CHECK(!direct.converged);
    CHECK(direct.iterations_used == 3);
    CHECK((direct.coupling - want).cwiseAbs().maxCoeff() <= 1e-13);

    cfg.log_domain = true;
    TransportPlan logd = sinkhorn(inst.a, inst.b, inst.cost, cfg);
    CHECK((logd.coupling - want).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("converged plans satisfy the marginal tolerance") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    RandomInstance inst = random_instance(Index(2 + seed % 5), Index(2 + (3 * seed) % 6), 3,
                                          seed * 77, seed % 2 == 1);
    for (double eps : {0.05, 0.3, 1.0}) {
      SinkhornConfig cfg;
      cfg.epsilon = eps;
      cfg.max_iterations = 200000;
      cfg.tolerance = 1e-8;
      TransportPlan plan = sinkhorn(inst.a, inst.b, inst.cost, cfg);
      REQUIRE(plan.converged);
      CHECK(max_marginal_violation(plan) <= 1e-8);
      CHECK(plan.coupling.minCoeff() >= 0.0);
      ++checked;
    }
  }
  CHECK(checked == 24);
}

TEST_CASE("log and direct domains agree at moderate epsilon") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomInstance inst = random_instance(4, 5, 3, seed * 13, seed % 2 == 0);
    for (double eps : {0.1, 1.0}) {
      SinkhornConfig cfg;
      cfg.epsilon = eps;
      cfg.max_iterations = 100000;
      cfg.tolerance = 1e-9;
      cfg.log_domain = true;
      TransportPlan lp = sinkhorn(inst.a, inst.b, inst.cost, cfg);
      cfg.log_domain = false;
      TransportPlan dp = sinkhorn(inst.a, inst.b, inst.cost, cfg);
      REQUIRE(lp.converged);
      REQUIRE(dp.converged);
      CHECK((lp.coupling - dp.coupling).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("unconverged solve reports the sweep budget and a usable plan") {
  RandomInstance inst = random_instance(5, 5, 3, 99, false);
  SinkhornConfig cfg;
  cfg.epsilon = 2.5e-3;
  cfg.max_iterations = 2;
  TransportPlan plan = sinkhorn(inst.a, inst.b, inst.cost, cfg);
  CHECK(!plan.converged);
  CHECK(plan.iterations_used == 2);
  CHECK(plan.coupling.allFinite());
  CHECK(plan.coupling.minCoeff() >= 0.0);
}

TEST_CASE("zero-weight supports stay zero in the plan") {
  Matrix pts(3, 1);
  pts << 0.0, 0.5, 1.0;
  Vector w(3);
  w << 1.0, 1e-14, 1.0;  // middle weight clamps to zero
  DiscreteDistribution a = make_distribution(pts, w);
  DiscreteDistribution b = points1d({0.25, 0.75});
  SinkhornConfig cfg;
  cfg.epsilon = 0.2;
  cfg.max_iterations = 100000;
  TransportPlan plan = sinkhorn(a, b, pairwise_cost(a, b, 2.0, 0.5), cfg);
  REQUIRE(plan.converged);
  CHECK(plan.coupling(1, 0) == 0.0);
  CHECK(plan.coupling(1, 1) == 0.0);
  CHECK(max_marginal_violation(plan) <= cfg.tolerance);
}

TEST_CASE("sinkhorn validates inputs") {
  DiscreteDistribution a = points1d({0.0, 1.0}), b = points1d({2.0});
  CostMatrix cost = pairwise_cost(a, b, 2.0, 0.5);
  SinkhornConfig cfg;

  CostMatrix wrong = cost;
  wrong.entries.resize(1, 1);
  wrong.entries << 1.0;
  CHECK_THROWS_AS(sinkhorn(a, b, wrong, cfg), std::invalid_argument);

  CostMatrix inf_cost = cost;
  inf_cost.entries(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(sinkhorn(a, b, inf_cost, cfg), std::invalid_argument);

  SinkhornConfig bad = cfg;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(sinkhorn(a, b, cost, bad), std::invalid_argument);
  bad = cfg;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(sinkhorn(a, b, cost, bad), std::invalid_argument);
  bad = cfg;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(sinkhorn(a, b, cost, bad), std::invalid_argument);

  TransportPlan plan = sinkhorn(a, b, cost, cfg);
  CHECK_THROWS_AS(transport_cost(plan, wrong), std::invalid_argument);
  CHECK_THROWS_AS(regularized_objective(plan, wrong, 0.1), std::invalid_argument);
}

TEST_CASE("sinkhorn divergence vanishes on identical inputs") {
  Rng rng(17);
  Matrix pts = testutil::unit_rows(5, 3, rng);
  DiscreteDistribution a = make_distribution(pts);
  SinkhornConfig cfg;
  cfg.epsilon = 0.1;
  cfg.max_iterations = 100000;
  SinkhornDivergenceDetail d = sinkhorn_divergence_detail(a, a, 2.0, 0.5, cfg);
  CHECK(d.all_converged);
  CHECK(std::abs(d.value) <= 1e-8);
  CHECK(sinkhorn_divergence(a, a, 2.0, 0.5, cfg) == d.value);
}
