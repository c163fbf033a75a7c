#pragma once

// Dense complex-matrix kernel: Hermitian eigendecomposition, matrix
// functions on the spectrum, Kronecker products and partial traces.
// Everything below is a pure value-semantic free function on Eigen types.

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "byzmac/common.hpp"

namespace byzmac {

inline void require_square(const CMatrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw NotSquare(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
}

inline double hermiticity_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const CMatrix& m, const char* who) {
  require_square(m, who);
  const double defect = hermiticity_defect(m);
  if (defect > tol::hermitian)
    throw NotHermitian(std::string(who) + ": |m - m^dagger| = " + std::to_string(defect));
}

struct HermEig {
  RVector eigenvalues;   // real, sorted descending
  CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

// Hermitian eigendecomposition, m = V diag(lambda) V^dagger with lambda descending.
inline HermEig herm_eig(const CMatrix& m) {
  require_hermitian(m, "herm_eig");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw Error("herm_eig: eigensolver failed to converge");
  const Eigen::Index n = m.rows();
  HermEig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  return out;
}

// Eigenvalues of a Hermitian PSD matrix with the rounding clamp applied:
// values in [-tol::eigenvalue_clamp, 0) become 0, lower values are an error.
inline RVector clamped_psd_eigenvalues(const RVector& eigenvalues, const char* who) {
  RVector out = eigenvalues;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] < -tol::eigenvalue_clamp)
      throw NegativeEigenvalue(std::string(who) + ": eigenvalue " + std::to_string(out[i]));
    if (out[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

// Applies a real function to the spectrum of a Hermitian PSD matrix.
// Eigenvalues at or below tol::support are flushed to zero first; without
// the floor, rounding noise epsilon would reappear as sqrt(epsilon).
template <typename Fn>
CMatrix spectral_map(const CMatrix& m, Fn&& fn, const char* who) {
  const HermEig eig = herm_eig(m);
  const RVector clamped = clamped_psd_eigenvalues(eig.eigenvalues, who);
  RVector mapped(clamped.size());
  for (Eigen::Index i = 0; i < clamped.size(); ++i)
    mapped[i] = clamped[i] > tol::support ? fn(clamped[i]) : fn(0.0);
  return eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.adjoint();
}

// Principal square root of a Hermitian PSD matrix.
inline CMatrix mat_sqrt(const CMatrix& m) {
  return spectral_map(m, [](double v) { return std::sqrt(v); }, "mat_sqrt");
}

// Base-2 logarithm on the support only; eigenvalues at or below tol::support
// contribute nothing, realizing the 0*log0 = 0 convention once multiplied by
// an operator sharing the support.
inline CMatrix mat_log2(const CMatrix& m) {
  return spectral_map(m, [](double v) { return v > tol::support ? std::log2(v) : 0.0; },
                      "mat_log2");
}

// Kronecker product. Dimensions multiply; the left factor owns the slow index,
// so tensor(|i><i|, |j><j|) projects onto basis index i*cols(b)+j.
template <typename DerivedA, typename DerivedB>
CMatrix tensor(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kDimensionCap || cols > kDimensionCap)
    throw DimensionCapExceeded("tensor: product dimension " + std::to_string(rows) + " exceeds " +
                               std::to_string(kDimensionCap));
  CMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.derived();
  return out;
}

// Partial trace over the subsystems NOT listed in `keep`. `dims` are the
// per-subsystem dimensions in tensor order; their product must match m.
inline CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                             const std::vector<int>& keep) {
  require_square(m, "partial_trace");
  long long total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionMismatch("partial_trace: nonpositive subsystem dimension");
    total *= d;
  }
  if (total != m.rows())
    throw DimensionMismatch("partial_trace: dims product " + std::to_string(total) +
                            " != matrix dimension " + std::to_string(m.rows()));
  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    if (k < 0 || k >= static_cast<int>(dims.size()))
      throw DimensionMismatch("partial_trace: keep index " + std::to_string(k) + " out of range");
    kept[k] = true;
  }

  // Strides of each subsystem in the flat index (row-major over dims).
  const int n = static_cast<int>(dims.size());
  std::vector<long long> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  std::vector<int> keep_idx, trace_idx;
  for (int i = 0; i < n; ++i) (kept[i] ? keep_idx : trace_idx).push_back(i);

  long long keep_dim = 1, trace_dim = 1;
  for (int i : keep_idx) keep_dim *= dims[i];
  for (int i : trace_idx) trace_dim *= dims[i];

  // Flat offset of the c-th kept (resp. t-th traced) configuration.
  auto offset = [&](const std::vector<int>& subsystems, long long counter) {
    long long off = 0;
    for (int i = static_cast<int>(subsystems.size()) - 1; i >= 0; --i) {
      const int sub = subsystems[i];
      off += (counter % dims[sub]) * stride[sub];
      counter /= dims[sub];
    }
    return off;
  };

  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  for (long long r = 0; r < keep_dim; ++r) {
    const long long row_base = offset(keep_idx, r);
    for (long long c = 0; c < keep_dim; ++c) {
      const long long col_base = offset(keep_idx, c);
      Complex sum = 0.0;
      for (long long t = 0; t < trace_dim; ++t) {
        const long long shift = offset(trace_idx, t);
        sum += m(row_base + shift, col_base + shift);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

// Trace norm ||m||_1 of a Hermitian matrix (sum of |eigenvalues|).
inline double trace_norm_hermitian(const CMatrix& m) {
  const HermEig eig = herm_eig(m);
  return eig.eigenvalues.cwiseAbs().sum();
}

inline CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

// Rank-1 projector |i><i| in dimension dim.
inline CMatrix basis_projector(int dim, int i) {
  CMatrix out = CMatrix::Zero(dim, dim);
  out(i, i) = 1.0;
  return out;
}

// Symmetrize away rounding asymmetry, (m + m^dagger)/2.
inline CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace byzmac
