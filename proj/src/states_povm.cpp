#include "byzmac/states_povm.hpp"

namespace byzmac {

DensityOperator::DensityOperator(CMatrix mat) : mat_(std::move(mat)) {
  require_hermitian(mat_, "DensityOperator");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(mat_, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -tol::eigenvalue_clamp)
    throw InvariantViolation("DensityOperator: negative eigenvalue " + std::to_string(min_eig));
  const double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace_one)
    throw InvariantViolation("DensityOperator: trace " + std::to_string(tr));
}

DensityOperator DensityOperator::pure(const CVector& v) {
  const double norm2 = v.squaredNorm();
  if (norm2 <= 0.0) throw InvariantViolation("DensityOperator::pure: zero vector");
  return DensityOperator(CMatrix(v * v.adjoint() / norm2));
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
  return DensityOperator(CMatrix(identity(dim) / static_cast<double>(dim)));
}

namespace {
std::vector<int> default_labels(std::size_t n) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
  return labels;
}
}  // namespace

Povm::Povm(std::vector<CMatrix> elements, std::vector<int> labels)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
  validate();
}

Povm::Povm(std::vector<CMatrix> elements)
    : elements_(std::move(elements)), labels_(default_labels(elements_.size())) {
  validate();
}

void Povm::validate() const {
  if (elements_.empty()) throw IncompletePovm("Povm: no elements");
  if (labels_.size() != elements_.size())
    throw InvariantViolation("Povm: label count != element count");
  const Eigen::Index dim = elements_.front().rows();
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const CMatrix& e : elements_) {
    require_hermitian(e, "Povm element");
    if (e.rows() != dim) throw DimensionMismatch("Povm: mixed element dimensions");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(e, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol::hermitian)
      throw InvariantViolation("Povm: element not PSD, eigenvalue " +
                               std::to_string(solver.eigenvalues().minCoeff()));
    sum += e;
  }
  const double defect = (sum - identity(static_cast<int>(dim))).cwiseAbs().maxCoeff();
  if (defect > tol::povm_complete)
    throw IncompletePovm("Povm: completeness defect " + std::to_string(defect));
}

RVector outcome_probs(const Povm& p, const DensityOperator& rho) {
  if (p.dim() != rho.dim())
    throw DimensionMismatch("outcome_probs: POVM dim " + std::to_string(p.dim()) +
                            " != state dim " + std::to_string(rho.dim()));
  RVector probs(p.size());
  for (int m = 0; m < p.size(); ++m) {
    double v = (p.element(m) * rho.mat()).trace().real();
    if (v < -1e-12)
      throw InvariantViolation("outcome_probs: probability " + std::to_string(v));
    probs[m] = std::max(0.0, v);
  }
  const double total = probs.sum();
  if (std::abs(total - 1.0) > tol::trace_one)
    throw InvariantViolation("outcome_probs: probabilities sum to " + std::to_string(total));
  return probs;
}

LuedersBranch lueders_branch(const CMatrix& d, const DensityOperator& rho) {
  if (d.rows() != rho.dim())
    throw DimensionMismatch("lueders_branch: operator dim != state dim");
  const double prob = (d * rho.mat()).trace().real();
  if (prob <= tol::zero_branch)
    throw ZeroProbabilityBranch("lueders_branch: probability " + std::to_string(prob));
  const CMatrix root = mat_sqrt(d);
  CMatrix post = hermitize(root * rho.mat() * root);
  post /= post.trace().real();
  return LuedersBranch{prob, DensityOperator(std::move(post))};
}

MeasureResult measure(const Povm& p, const DensityOperator& rho, Rng& rng) {
  const RVector probs = outcome_probs(p, rho);
  const int idx = rng.pick(probs);
  LuedersBranch branch = lueders_branch(p.element(idx), rho);
  return MeasureResult{p.label(idx), std::move(branch.posterior)};
}

QuantumChannel::QuantumChannel(std::vector<CMatrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw InvariantViolation("QuantumChannel: no Kraus operators");
  const Eigen::Index dim = kraus_.front().rows();
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const CMatrix& k : kraus_) {
    if (k.rows() != dim || k.cols() != dim)
      throw DimensionMismatch("QuantumChannel: mixed Kraus dimensions");
    sum += k.adjoint() * k;
  }
  const double defect = (sum - byzmac::identity(static_cast<int>(dim))).cwiseAbs().maxCoeff();
  if (defect > tol::povm_complete)
    throw InvariantViolation("QuantumChannel: not trace preserving, defect " +
                             std::to_string(defect));
}

QuantumChannel QuantumChannel::identity(int dim) {
  return QuantumChannel({byzmac::identity(dim)});
}

CMatrix QuantumChannel::apply_raw(const CMatrix& m) const {
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (const CMatrix& k : kraus_) out += k * m * k.adjoint();
  return out;
}

DensityOperator QuantumChannel::apply(const DensityOperator& rho) const {
  if (dim() != rho.dim()) throw DimensionMismatch("QuantumChannel::apply: dimension mismatch");
  return DensityOperator(hermitize(apply_raw(rho.mat())));
}

QuantumChannel induced_channel(const Povm& p) {
  std::vector<CMatrix> kraus;
  kraus.reserve(p.size());
  for (int m = 0; m < p.size(); ++m) kraus.push_back(mat_sqrt(p.element(m)));
  return QuantumChannel(std::move(kraus));
}

GentleMeasurementReport gentle_measurement_check(const CMatrix& d, const DensityOperator& rho) {
  require_hermitian(d, "gentle_measurement_check");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(d, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol::eigenvalue_clamp ||
      solver.eigenvalues().maxCoeff() > 1.0 + tol::eigenvalue_clamp)
    throw InvariantViolation("gentle_measurement_check: operator outside [0, identity]");
  const LuedersBranch branch = lueders_branch(d, rho);
  const double t = 0.5 * trace_norm_hermitian(rho.mat() - branch.posterior.mat());
  const double bound = std::sqrt(8.0 * std::max(0.0, 1.0 - branch.prob));
  return GentleMeasurementReport{branch.prob, t, bound, t <= bound};
}

}  // namespace byzmac
