#pragma once

// Density operators, POVMs, Lueders measurement updates, the induced channel
// of a full POVM, and the gentle-measurement bound utility.

#include <utility>
#include <vector>

#include "byzmac/qmatrix.hpp"

namespace byzmac {

// Hermitian, PSD, unit-trace matrix. Validation happens at construction;
// instances are immutable values afterwards.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix mat);

  // Pure state |v><v| / <v|v>.
  static DensityOperator pure(const CVector& v);
  static DensityOperator maximally_mixed(int dim);

  const CMatrix& mat() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

 private:
  CMatrix mat_;
};

// Finite POVM: PSD elements summing to identity, one per outcome label.
class Povm {
 public:
  Povm(std::vector<CMatrix> elements, std::vector<int> labels);
  explicit Povm(std::vector<CMatrix> elements);  // labels 0..m-1

  int size() const { return static_cast<int>(elements_.size()); }
  int dim() const { return static_cast<int>(elements_.front().rows()); }
  const CMatrix& element(int i) const { return elements_.at(i); }
  const std::vector<CMatrix>& elements() const { return elements_; }
  int label(int i) const { return labels_.at(i); }
  const std::vector<int>& labels() const { return labels_; }

 private:
  void validate() const;

  std::vector<CMatrix> elements_;
  std::vector<int> labels_;
};

// Trace-preserving map rho -> sum_i K_i rho K_i^dagger.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<CMatrix> kraus);

  static QuantumChannel identity(int dim);

  DensityOperator apply(const DensityOperator& rho) const;
  CMatrix apply_raw(const CMatrix& m) const;

  int dim() const { return static_cast<int>(kraus_.front().rows()); }
  const std::vector<CMatrix>& kraus() const { return kraus_; }

 private:
  std::vector<CMatrix> kraus_;
};

// Outcome probabilities tr(D_m rho), clamped at 0 and summing to 1.
RVector outcome_probs(const Povm& p, const DensityOperator& rho);

struct LuedersBranch {
  double prob;
  DensityOperator posterior;
};

// Probability tr(d rho) and normalized posterior sqrt(d) rho sqrt(d) / prob.
// Throws ZeroProbabilityBranch when prob <= tol::zero_branch.
LuedersBranch lueders_branch(const CMatrix& d, const DensityOperator& rho);

struct MeasureResult {
  int outcome;  // label of the sampled outcome
  DensityOperator posterior;
};

// Samples an outcome from outcome_probs and returns its Lueders branch.
MeasureResult measure(const Povm& p, const DensityOperator& rho, Rng& rng);

// C_E : rho -> sum_m sqrt(D_m) rho sqrt(D_m), the average disturbance of the POVM.
QuantumChannel induced_channel(const Povm& p);

struct GentleMeasurementReport {
  double prob;            // tr(d rho)
  double trace_distance;  // (1/2) || rho - sqrt(d) rho sqrt(d)/prob ||_1
  double bound;           // sqrt(8 (1 - prob))
  bool holds;             // trace_distance <= bound
};

// Checks the gentle-measurement inequality for a single outcome operator
// 0 <= d <= identity.
GentleMeasurementReport gentle_measurement_check(const CMatrix& d, const DensityOperator& rho);

}  // namespace byzmac
