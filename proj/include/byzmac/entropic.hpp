#pragma once

// Entropic quantities in bits: von Neumann entropy, conditional entropy,
// quantum relative entropy, Holevo quantity, quantum mutual information,
// and the weighted-branch conditional Holevo quantity.

#include <limits>
#include <vector>

#include "byzmac/cq_channel.hpp"

namespace byzmac {

double von_neumann_entropy(const DensityOperator& rho);

// S(V|P) = sum_x P(x) S(V(x)).
double conditional_entropy(const std::vector<DensityOperator>& states, const RVector& probs);
double conditional_entropy(const CqMacChannel& single_sender, const InputDistribution& p);

// D(rho || sigma) in bits; +infinity when supp(rho) is not contained in
// supp(sigma) (sigma support cut at eigenvalues > tol::eigenvalue_clamp).
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

// chi(P; V) = S(sum_x P(x) V(x)) - S(V|P).
double holevo(const std::vector<DensityOperator>& states, const RVector& probs);
double holevo(const InputDistribution& p, const CqMacChannel& single_sender);

// I(P; V) = sum_x P(x) D(V(x) || sum_x' P(x') V(x')), computed through
// relative entropies as an independent route to the same value as holevo.
double mutual_info(const std::vector<DensityOperator>& states, const RVector& probs);
double mutual_info(const InputDistribution& p, const CqMacChannel& single_sender);

struct HolevoBranch {
  double weight;
  std::vector<DensityOperator> states;  // one per input symbol
};

// sum_b weight_b chi(p; branch_b). Weights must form a distribution and all
// branches must share p's alphabet.
double conditional_holevo(const RVector& p, const std::vector<HolevoBranch>& branches);

}  // namespace byzmac
