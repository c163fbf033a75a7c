#include "byzmac/entropic.hpp"

namespace byzmac {

namespace {

std::vector<DensityOperator> channel_states(const CqMacChannel& ch) {
  if (ch.senders() != 1)
    throw DimensionMismatch("entropic: expected a one-sender channel, got k = " +
                            std::to_string(ch.senders()));
  return ch.states();
}

DensityOperator average_state(const std::vector<DensityOperator>& states, const RVector& probs) {
  if (static_cast<Eigen::Index>(states.size()) != probs.size())
    throw DimensionMismatch("entropic: " + std::to_string(states.size()) + " states vs " +
                            std::to_string(probs.size()) + " probabilities");
  const int dim = states.front().dim();
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (std::size_t x = 0; x < states.size(); ++x) acc += probs[x] * states[x].mat();
  return DensityOperator(std::move(acc));
}

}  // namespace

double von_neumann_entropy(const DensityOperator& rho) {
  const HermEig eig = herm_eig(rho.mat());
  const RVector lambda = clamped_psd_eigenvalues(eig.eigenvalues, "von_neumann_entropy");
  double s = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda[i] > tol::support) s -= lambda[i] * std::log2(lambda[i]);
  return s;
}

double conditional_entropy(const std::vector<DensityOperator>& states, const RVector& probs) {
  if (static_cast<Eigen::Index>(states.size()) != probs.size())
    throw DimensionMismatch("conditional_entropy: size mismatch");
  double s = 0.0;
  for (std::size_t x = 0; x < states.size(); ++x)
    if (probs[x] > 0.0) s += probs[x] * von_neumann_entropy(states[x]);
  return s;
}

double conditional_entropy(const CqMacChannel& single_sender, const InputDistribution& p) {
  return conditional_entropy(channel_states(single_sender), p.probs);
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative_entropy: dimension mismatch");
  const HermEig sig = herm_eig(sigma.mat());

  // Mass of rho outside sigma's support decides finiteness.
  double null_mass = 0.0;
  for (Eigen::Index j = 0; j < sig.eigenvalues.size(); ++j) {
    if (sig.eigenvalues[j] > tol::eigenvalue_clamp) continue;
    const CVector v = sig.eigenvectors.col(j);
    null_mass += (v.adjoint() * rho.mat() * v)(0, 0).real();
  }
  if (null_mass > 1e-9) return std::numeric_limits<double>::infinity();

  double tr_rho_log_sigma = 0.0;
  for (Eigen::Index j = 0; j < sig.eigenvalues.size(); ++j) {
    if (sig.eigenvalues[j] <= tol::eigenvalue_clamp) continue;
    const CVector v = sig.eigenvectors.col(j);
    const double overlap = (v.adjoint() * rho.mat() * v)(0, 0).real();
    tr_rho_log_sigma += overlap * std::log2(sig.eigenvalues[j]);
  }
  const double tr_rho_log_rho = -von_neumann_entropy(rho);
  return tr_rho_log_rho - tr_rho_log_sigma;
}

double holevo(const std::vector<DensityOperator>& states, const RVector& probs) {
  return von_neumann_entropy(average_state(states, probs)) - conditional_entropy(states, probs);
}

double holevo(const InputDistribution& p, const CqMacChannel& single_sender) {
  return holevo(channel_states(single_sender), p.probs);
}

double mutual_info(const std::vector<DensityOperator>& states, const RVector& probs) {
  const DensityOperator avg = average_state(states, probs);
  double total = 0.0;
  for (std::size_t x = 0; x < states.size(); ++x) {
    if (probs[x] <= 0.0) continue;
    total += probs[x] * relative_entropy(states[x], avg);
  }
  return total;
}

double mutual_info(const InputDistribution& p, const CqMacChannel& single_sender) {
  return mutual_info(channel_states(single_sender), p.probs);
}

double conditional_holevo(const RVector& p, const std::vector<HolevoBranch>& branches) {
  if (branches.empty()) throw WeightNotNormalized("conditional_holevo: no branches");
  double weight_sum = 0.0;
  for (const HolevoBranch& b : branches) {
    if (b.weight < -1e-12)
      throw WeightNotNormalized("conditional_holevo: negative weight " + std::to_string(b.weight));
    weight_sum += b.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9)
    throw WeightNotNormalized("conditional_holevo: weights sum to " + std::to_string(weight_sum));
  double total = 0.0;
  for (const HolevoBranch& b : branches) {
    if (b.weight <= 0.0) continue;
    if (static_cast<Eigen::Index>(b.states.size()) != p.size())
      throw DimensionMismatch("conditional_holevo: branch alphabet mismatch");
    total += b.weight * holevo(b.states, p);
  }
  return total;
}

}  // namespace byzmac
