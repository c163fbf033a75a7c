#pragma once

// Shared test helpers: deterministic random generators for states, channels
// and distributions, plus small independent oracles (characteristic
// polynomial roots, binary entropy).

#include <cmath>
#include <vector>

#include "byzmac/cq_channel.hpp"

namespace byzmac::testing {

inline CMatrix random_ginibre(int rows, int cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(rng.gaussian(), rng.gaussian());
  return g;
}

inline CMatrix random_unitary(int dim, Rng& rng) {
  const CMatrix g = random_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ();
}

inline CMatrix random_hermitian(int dim, Rng& rng) {
  const CMatrix g = random_ginibre(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

// Full-rank mixed state rho = (G G^dagger + eps I) / tr.
inline DensityOperator random_state(int dim, Rng& rng, double eps = 1e-3) {
  const CMatrix g = random_ginibre(dim, dim, rng);
  CMatrix m = g * g.adjoint() + eps * CMatrix::Identity(dim, dim);
  m /= m.trace().real();
  return DensityOperator(hermitize(m));
}

inline DensityOperator random_pure(int dim, Rng& rng) {
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(rng.gaussian(), rng.gaussian());
  return DensityOperator::pure(v);
}

inline RVector random_dist(int size, Rng& rng, double floor = 0.02) {
  RVector d(size);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    d[i] = floor - std::log(1.0 - rng.uniform() + 1e-300);
    total += d[i];
  }
  return d / total;
}

inline std::vector<DensityOperator> random_cq_states(int symbols, int dim, Rng& rng) {
  std::vector<DensityOperator> states;
  states.reserve(symbols);
  for (int x = 0; x < symbols; ++x) states.push_back(random_state(dim, rng));
  return states;
}

inline CqMacChannel random_single_sender_channel(int symbols, int dim, Rng& rng) {
  return CqMacChannel({symbols}, random_cq_states(symbols, dim, rng));
}

// Trace-preserving channel with `kraus_count` Kraus operators, built from a
// Haar-ish isometry.
inline QuantumChannel random_tp_channel(int dim, int kraus_count, Rng& rng) {
  const CMatrix g = random_ginibre(dim * kraus_count, dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix q = qr.householderQ();
  std::vector<CMatrix> kraus;
  for (int i = 0; i < kraus_count; ++i) kraus.push_back(q.block(i * dim, 0, dim, dim));
  return QuantumChannel(std::move(kraus));
}

// Outcome operator near the identity so that tr(d rho) stays high.
inline CMatrix random_gentle_operator(int dim, Rng& rng, double strength) {
  const CMatrix g = random_ginibre(dim, dim, rng);
  CMatrix b = g * g.adjoint();
  b /= Eigen::SelfAdjointEigenSolver<CMatrix>(b, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  return hermitize(CMatrix::Identity(dim, dim) - strength * b);
}

// Roots of the characteristic polynomial of a Hermitian matrix, dims <= 3,
// solved in closed form; descending order.
inline RVector char_poly_eigenvalues(const CMatrix& m) {
  const int dim = static_cast<int>(m.rows());
  RVector roots(dim);
  if (dim == 1) {
    roots[0] = m(0, 0).real();
    return roots;
  }
  if (dim == 2) {
    const double tr = m.trace().real();
    const double det = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    roots[0] = 0.5 * (tr + disc);
    roots[1] = 0.5 * (tr - disc);
    return roots;
  }
  if (dim != 3) throw Error("char_poly_eigenvalues: dims <= 3 only");
  // lambda^3 + a lambda^2 + b lambda + c, all roots real for Hermitian m.
  const double a = -m.trace().real();
  const double b = ((m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) + (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) +
                    (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)))
                       .real();
  const double c =
      -(m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
        m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)))
           .real();
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  if (std::abs(p) < 1e-14) {
    const double t = std::cbrt(-q);
    roots.setConstant(t - a / 3.0);
  } else {
    const double mfac = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
    double cosarg = 3.0 * q / (p * mfac);
    cosarg = std::clamp(cosarg, -1.0, 1.0);
    const double theta = std::acos(cosarg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots[k] = mfac * std::cos(theta - 2.0 * M_PI * k / 3.0) - a / 3.0;
  }
  std::sort(roots.data(), roots.data() + dim, std::greater<double>());
  return roots;
}

inline double binary_entropy(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace byzmac::testing
