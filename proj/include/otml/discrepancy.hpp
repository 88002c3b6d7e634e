#pragma once

#include "otml/transport.hpp"

namespace otml {

enum class Discrepancy { MMD_Laplacian, MMD_Gaussian, Wasserstein };

struct DiscrepancyKind {
  Discrepancy kind = Discrepancy::MMD_Laplacian;
  double sigma = 0.05;      // kernel bandwidth for the MMD kinds
  SinkhornConfig sinkhorn;  // solver settings for the Wasserstein kind
};

namespace testing {
// Multiplies every pointwise kernel value by (1 + kernel_perturbation).
// Zero in production; the self test sets it to verify its own checks can
// detect a broken kernel (negative control).
extern double kernel_perturbation;
}  // namespace testing

// Pointwise kernel: exp(-|u-v|/sigma) or exp(-|u-v|^2 / (2 sigma^2)).
double kernel_eval(const DiscrepancyKind& kind, const Vector& u, const Vector& v);

// Squared-MMD expansion with uniform averaging over supports; weights are
// deliberately ignored (duplicated support points change the value).
double mmd(const DiscreteDistribution& a, const DiscreteDistribution& b,
           const DiscrepancyKind& kind);

// E(a,b) - (E(a,a) + E(b,b)) / 2 with E(x,y) = sum_ij wx_i wy_j cost(i,j).
// With uniform weights this equals half of the squared-MMD expansion taken
// with kernel -cost (see the kernel-duality tests).
double energy_distance(const DiscreteDistribution& a, const DiscreteDistribution& b, double p,
                       double scale);

// Unified discrepancy: MMD for kernel kinds, sharp transport cost of the
// solved plan for the Wasserstein kind (p=2, scale 1/2 cost).
double phi(const DiscreteDistribution& a, const DiscreteDistribution& b,
           const DiscrepancyKind& kind);

}  // namespace otml
