#include "otml/transport.hpp"

#include <cmath>
#include <limits>

namespace otml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const DiscreteDistribution& a, const DiscreteDistribution& b,
                  const CostMatrix& cost, const SinkhornConfig& cfg) {
  if (cost.entries.rows() != a.size() || cost.entries.cols() != b.size())
    fail_arg("sinkhorn: cost shape does not match distribution sizes");
  if (!cost.entries.allFinite()) fail_arg("sinkhorn: non-finite cost entry");
  if (!(cfg.epsilon > 0.0)) fail_arg("sinkhorn: epsilon must be positive");
  if (!(cfg.tolerance > 0.0)) fail_arg("sinkhorn: tolerance must be positive");
  if (cfg.max_iterations < 1) fail_arg("sinkhorn: max_iterations must be >= 1");
}

// log sum exp over a buffer; returns -inf for an all-(-inf) input.
double lse(const double* v, Index n) {
  double mx = kNegInf;
  for (Index i = 0; i < n; ++i)
    if (v[i] > mx) mx = v[i];
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

TransportPlan solve_log_domain(const Vector& w, const Vector& wt, const Matrix& D,
                               const SinkhornConfig& cfg) {
  const Index n = D.rows(), m = D.cols();
  Matrix logK = (-D / cfg.epsilon).eval();
  Vector logw(n), logwt(m);
  for (Index i = 0; i < n; ++i) logw[i] = w[i] > 0.0 ? std::log(w[i]) : kNegInf;
  for (Index j = 0; j < m; ++j) logwt[j] = wt[j] > 0.0 ? std::log(wt[j]) : kNegInf;

  Vector lr = Vector::Zero(n), lc = Vector::Zero(m);  // c starts at all-ones
  std::vector<double> buf(std::size_t(std::max(n, m)));

  TransportPlan plan;
  plan.row_marginal = w;
  plan.col_marginal = wt;

  auto row_logsums = [&](Vector& s) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) buf[std::size_t(j)] = logK(i, j) + lc[j];
      s[i] = lse(buf.data(), m);
    }
  };

  Vector s(n), t(m);
  bool have_r = false;
  for (int iter = 1; iter <= cfg.max_iterations + 1; ++iter) {
    row_logsums(s);
    if (have_r) {
      // After the previous sweep the columns match their targets to rounding;
      // the row violation of the current plan decides convergence.
      double viol = 0.0;
      for (Index i = 0; i < n; ++i) {
        double rs = (lr[i] == kNegInf || s[i] == kNegInf) ? 0.0 : std::exp(lr[i] + s[i]);
        viol += std::abs(rs - w[i]);
      }
      if (viol <= cfg.tolerance) {
        plan.converged = true;
        plan.iterations_used = iter - 1;
        break;
      }
      if (iter == cfg.max_iterations + 1) {
        plan.iterations_used = cfg.max_iterations;
        break;
      }
    }
    for (Index i = 0; i < n; ++i) lr[i] = (logw[i] == kNegInf) ? kNegInf : logw[i] - s[i];
    have_r = true;
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i)
        buf[std::size_t(i)] = (lr[i] == kNegInf) ? kNegInf : logK(i, j) + lr[i];
      t[j] = lse(buf.data(), n);
    }
    for (Index j = 0; j < m; ++j) lc[j] = (logwt[j] == kNegInf) ? kNegInf : logwt[j] - t[j];
  }

  plan.coupling.resize(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      double e = lr[i] + logK(i, j) + lc[j];
      plan.coupling(i, j) = (lr[i] == kNegInf || lc[j] == kNegInf) ? 0.0 : std::exp(e);
    }
  return plan;
}

TransportPlan solve_direct_domain(const Vector& w, const Vector& wt, const Matrix& D,
                                  const SinkhornConfig& cfg) {
  const Index n = D.rows(), m = D.cols();
  // scalar exp so tiny kernels underflow to exactly zero instead of a
  // clamped packet-math value; the zero checks below rely on that
  Matrix K(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) K(i, j) = std::exp(-D(i, j) / cfg.epsilon);
  Vector r = Vector::Ones(n), c = Vector::Ones(m);

  TransportPlan plan;
  plan.row_marginal = w;
  plan.col_marginal = wt;

  bool have_r = false;
  Vector kc(n);
  for (int iter = 1; iter <= cfg.max_iterations + 1; ++iter) {
    kc = K * c;
    if (have_r) {
      double viol = 0.0;
      for (Index i = 0; i < n; ++i) viol += std::abs(r[i] * kc[i] - w[i]);
      if (viol <= cfg.tolerance) {
        plan.converged = true;
        plan.iterations_used = iter - 1;
        break;
      }
      if (iter == cfg.max_iterations + 1) {
        plan.iterations_used = cfg.max_iterations;
        break;
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (kc[i] <= 0.0) fail_num("sinkhorn: kernel column sum underflowed to zero; use log domain");
      r[i] = w[i] / kc[i];
    }
    have_r = true;
    Vector kr = K.transpose() * r;
    for (Index j = 0; j < m; ++j) {
      if (kr[j] <= 0.0) fail_num("sinkhorn: kernel row sum underflowed to zero; use log domain");
      c[j] = wt[j] / kr[j];
    }
  }

  plan.coupling = r.asDiagonal() * K * c.asDiagonal();
  return plan;
}

}  // namespace

TransportPlan sinkhorn(const DiscreteDistribution& a, const DiscreteDistribution& b,
                       const CostMatrix& cost, const SinkhornConfig& cfg) {
  check_inputs(a, b, cost, cfg);
  return cfg.log_domain ? solve_log_domain(a.weights, b.weights, cost.entries, cfg)
                        : solve_direct_domain(a.weights, b.weights, cost.entries, cfg);
}

double transport_cost(const TransportPlan& plan, const CostMatrix& cost) {
  if (plan.coupling.rows() != cost.entries.rows() || plan.coupling.cols() != cost.entries.cols())
    fail_arg("transport_cost: shape mismatch");
  return (plan.coupling.array() * cost.entries.array()).sum();
}

double regularized_objective(const TransportPlan& plan, const CostMatrix& cost, double epsilon) {
  if (plan.coupling.rows() != cost.entries.rows() || plan.coupling.cols() != cost.entries.cols())
    fail_arg("regularized_objective: shape mismatch");
  double value = 0.0;
  for (Index i = 0; i < plan.coupling.rows(); ++i)
    for (Index j = 0; j < plan.coupling.cols(); ++j) {
      double t = plan.coupling(i, j);
      value += t * cost.entries(i, j);
      if (t > 0.0) value += epsilon * t * (std::log(t) - 1.0);
    }
  return value;
}

double max_marginal_violation(const TransportPlan& plan) {
  double row = (plan.coupling.rowwise().sum() - plan.row_marginal).cwiseAbs().sum();
  double col = (plan.coupling.colwise().sum().transpose() - plan.col_marginal).cwiseAbs().sum();
  return std::max(row, col);
}

SinkhornDivergenceDetail sinkhorn_divergence_detail(const DiscreteDistribution& a,
                                                    const DiscreteDistribution& b, double p,
                                                    double scale, const SinkhornConfig& cfg) {
  SinkhornDivergenceDetail out;
  double w_ab, w_aa, w_bb;
  out.all_converged = true;
  auto solve = [&](const DiscreteDistribution& x, const DiscreteDistribution& y) {
    TransportPlan plan = sinkhorn(x, y, pairwise_cost(x, y, p, scale), cfg);
    out.all_converged = out.all_converged && plan.converged;
    out.max_iterations_used = std::max(out.max_iterations_used, plan.iterations_used);
    out.max_violation = std::max(out.max_violation, max_marginal_violation(plan));
    return transport_cost(plan, pairwise_cost(x, y, p, scale));
  };
  w_ab = solve(a, b);
  w_aa = solve(a, a);
  w_bb = solve(b, b);
  out.value = w_ab - 0.5 * (w_aa + w_bb);
  return out;
}

double sinkhorn_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b, double p,
                           double scale, const SinkhornConfig& cfg) {
  return sinkhorn_divergence_detail(a, b, p, scale, cfg).value;
}

}  // namespace otml
