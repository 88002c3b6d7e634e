#pragma once

#include "otml/distribution.hpp"

namespace otml {

struct SinkhornConfig {
  double epsilon = 2.5e-3;    // entropy weight
  int max_iterations = 10000; // full row+column sweeps
  double tolerance = 1e-6;    // max L1 marginal violation
  bool log_domain = true;     // required for small epsilon; direct domain kept
                              // for cross-checking at moderate epsilon
};

struct TransportPlan {
  Matrix coupling;      // n x m, nonnegative
  Vector row_marginal;  // target row sums (source weights)
  Vector col_marginal;  // target column sums (target weights)
  int iterations_used = 0;
  bool converged = false;
};

// Alternating scaling of exp(-cost/epsilon) onto the two marginals.
// Column scaling starts at all-ones; rows are rescaled first in each sweep.
// converged is true iff max(L1 row violation, L1 column violation) fell
// within cfg.tolerance before the sweep budget ran out.
TransportPlan sinkhorn(const DiscreteDistribution& a, const DiscreteDistribution& b,
                       const CostMatrix& cost, const SinkhornConfig& cfg);

// Sum_ij cost(i,j) * coupling(i,j).
double transport_cost(const TransportPlan& plan, const CostMatrix& cost);

// Entropic objective: transport cost + epsilon * Sum T (ln T - 1), with
// 0 * ln 0 := 0. The converged plan is the exact minimizer of this value,
// so its value admits exact envelope-gradient checks.
double regularized_objective(const TransportPlan& plan, const CostMatrix& cost, double epsilon);

// L1 violations of the plan against its stored target marginals.
double max_marginal_violation(const TransportPlan& plan);

// W(a,b) - (W(a,a) + W(b,b)) / 2 where W is the sharp transport cost of a
// converged plan at the given entropy weight.
double sinkhorn_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b, double p,
                           double scale, const SinkhornConfig& cfg);

struct SinkhornDivergenceDetail {
  double value = 0.0;
  bool all_converged = false;
  int max_iterations_used = 0;
  double max_violation = 0.0;
};

SinkhornDivergenceDetail sinkhorn_divergence_detail(const DiscreteDistribution& a,
                                                    const DiscreteDistribution& b, double p,
                                                    double scale, const SinkhornConfig& cfg);

}  // namespace otml
