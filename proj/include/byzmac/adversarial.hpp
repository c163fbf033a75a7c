#pragma once

// Symmetrizability checkers for arbitrarily-varying views: a linear-program
// feasibility test for the symmetrizing family tau, and an overlap-based
// test for orthogonal symmetrizability.

#include <optional>
#include <utility>

#include "byzmac/cq_channel.hpp"

namespace byzmac {

// tau(x, t): one distribution over jammer symbols per honest symbol.
struct SymWitness {
  Eigen::MatrixXd tau;
  double slack;  // max-abs violation of the symmetrizing equation at tau
};

struct SymVerdict {
  bool symmetrizable;
  // For a symmetrizable channel this is the witness violation; otherwise it
  // is the LP optimum, a certified lower bound on any tau's violation.
  double slack;
  std::optional<SymWitness> witness;
};

// Max-abs entrywise violation of
//   sum_t tau(t|x) W(x',t) = sum_t tau(t|x') W(x,t)  over all pairs x != x'.
double symmetrization_violation(const AvcView& avc, const Eigen::MatrixXd& tau);

// Minimizes the violation over all tau families by a deterministic dense LP;
// Symmetrizable iff the optimum is at most epsilon.
SymVerdict check_symmetrizable(const AvcView& avc, double epsilon = tol::sym_feasible);

enum class OrthKind { Witness, CertifiedNot, Unknown };

struct OrthVerdict {
  OrthKind kind;
  std::optional<Eigen::MatrixXd> tau;                // populated for Witness
  std::optional<std::pair<int, int>> blocking_pair;  // populated for CertifiedNot
  double min_pair_overlap = 0.0;  // min over pairs of the witness's trace overlap
};

// Orthogonal symmetrizability: looks for tau making
//   tr( (sum_t tau(t|x) W(x',t)) (sum_t tau(t|x') W(x,t)) ) > 0
// for every pair x != x'. CertifiedNot when some pair has all cross overlaps
// tr(W(x',t) W(x,t')) = 0, which no tau can fix; Witness when a candidate tau
// achieves strictly positive overlap on every pair; Unknown when the sampling
// budget expires first.
OrthVerdict check_orthogonally_symmetrizable(const AvcView& avc, int search_budget, Rng& rng);

}  // namespace byzmac
