#pragma once

#include "otml/transport.hpp"

namespace otml {

struct ExactOtResult {
  TransportPlan plan;  // optimal vertex plan; iterations_used counts pivots
  double cost = 0.0;
};

// Exact solver for the transportation LP at oracle scale (n*m <= 400):
// northwest-corner start, then dual (u,v) pivoting to optimality with
// lowest-index entering/leaving selection so degenerate instances cannot
// cycle. Among equal-cost optima the deterministic pivot order picks one;
// only the cost value is contract-bearing.
ExactOtResult exact_ot(const DiscreteDistribution& a, const DiscreteDistribution& b,
                       const CostMatrix& cost);

}  // namespace otml
