#include "otml/discrepancy.hpp"

#include <cmath>

namespace otml {

namespace testing {
double kernel_perturbation = 0.0;
}

double kernel_eval(const DiscrepancyKind& kind, const Vector& u, const Vector& v) {
  if (u.size() != v.size()) fail_arg("kernel_eval: dimension mismatch");
  if (kind.kind == Discrepancy::Wasserstein)
    fail_arg("kernel_eval: Wasserstein has no pointwise kernel");
  if (!(kind.sigma > 0.0)) fail_arg("kernel_eval: sigma must be positive");
  double d2 = (u - v).squaredNorm();
  double k;
  if (kind.kind == Discrepancy::MMD_Laplacian)
    k = std::exp(-std::sqrt(d2) / kind.sigma);
  else
    k = std::exp(-d2 / (2.0 * kind.sigma * kind.sigma));
  return k * (1.0 + testing::kernel_perturbation);
}

double mmd(const DiscreteDistribution& a, const DiscreteDistribution& b,
           const DiscrepancyKind& kind) {
  if (a.dim() != b.dim()) fail_arg("mmd: dimension mismatch");
  if (kind.kind == Discrepancy::Wasserstein) fail_arg("mmd: Wasserstein kind has no kernel");
  const Index n = a.size(), m = b.size();
  double self_a = 0.0, self_b = 0.0, cross = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      self_a += kernel_eval(kind, a.supports.row(i).transpose(), a.supports.row(j).transpose());
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      self_b += kernel_eval(kind, b.supports.row(i).transpose(), b.supports.row(j).transpose());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      cross += kernel_eval(kind, a.supports.row(i).transpose(), b.supports.row(j).transpose());
  return self_a / double(n * n) - 2.0 * cross / double(n * m) + self_b / double(m * m);
}

double energy_distance(const DiscreteDistribution& a, const DiscreteDistribution& b, double p,
                       double scale) {
  if (a.dim() != b.dim()) fail_arg("energy_distance: dimension mismatch");
  auto e_term = [&](const DiscreteDistribution& x, const DiscreteDistribution& y) {
    CostMatrix c = pairwise_cost(x, y, p, scale);
    return x.weights.dot(c.entries * y.weights);
  };
  return e_term(a, b) - 0.5 * (e_term(a, a) + e_term(b, b));
}

double phi(const DiscreteDistribution& a, const DiscreteDistribution& b,
           const DiscrepancyKind& kind) {
  if (kind.kind == Discrepancy::Wasserstein) {
    CostMatrix c = pairwise_cost(a, b, 2.0, 0.5);
    TransportPlan plan = sinkhorn(a, b, c, kind.sinkhorn);
    return transport_cost(plan, c);
  }
  return mmd(a, b, kind);
}

}  // namespace otml
