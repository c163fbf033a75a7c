#include "byzmac/adversarial.hpp"

#include <vector>

namespace byzmac {

namespace {

// Dense two-phase primal simplex with Bland's rule, for
//   min c.x  s.t.  A x = b, x >= 0.
// Deterministic and anti-cycling; sized for the few-hundred-row programs the
// symmetrizability reduction produces.
struct LpResult {
  double value;
  RVector x;
};

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;

class SimplexTableau {
 public:
  SimplexTableau(const Eigen::MatrixXd& a, const RVector& b) {
    m_ = static_cast<int>(a.rows());
    n_ = static_cast<int>(a.cols());
    t_.resize(m_, n_ + m_ + 1);
    t_.leftCols(n_) = a;
    t_.block(0, n_, m_, m_) = Eigen::MatrixXd::Identity(m_, m_);
    t_.col(n_ + m_) = b;
    for (int i = 0; i < m_; ++i)
      if (t_(i, n_ + m_) < 0.0) t_.row(i) = -t_.row(i);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  // Runs phase 1 (feasibility via artificials) then phase 2 on cost c.
  LpResult solve(const RVector& c) {
    RVector phase1 = RVector::Zero(n_ + m_);
    phase1.tail(m_).setOnes();
    run(phase1, /*allow_artificial=*/true);
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += t_(i, n_ + m_);
    if (infeas > 1e-7) throw Error("simplex: infeasible program, residual " + std::to_string(infeas));
    drive_out_artificials();

    RVector cost = RVector::Zero(n_ + m_);
    cost.head(n_) = c;
    run(cost, /*allow_artificial=*/false);

    RVector x = RVector::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_(i, n_ + m_);
    return LpResult{c.dot(x), std::move(x)};
  }

 private:
  double objective(const RVector& cost) const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i) v += cost[basis_[i]] * t_(i, n_ + m_);
    return v;
  }

  void run(const RVector& cost, bool allow_artificial) {
    const int cols = allow_artificial ? n_ + m_ : n_;
    RVector reduced(cols);
    // Dantzig's rule with a largest-pivot ratio tie-break for accuracy;
    // falls back to Bland's rule if the objective stalls, so the walk
    // cannot cycle.
    bool bland = false;
    int stalled = 0;
    const int stall_limit = 4 * (m_ + n_);
    double last_value = objective(cost);
    while (true) {
      for (int j = 0; j < cols; ++j) {
        double r = cost[j];
        for (int i = 0; i < m_; ++i) r -= cost[basis_[i]] * t_(i, j);
        reduced[j] = r;
      }
      int enter = -1;
      if (bland) {
        for (int j = 0; j < cols; ++j) {
          if (reduced[j] < -kCostEps && !in_basis(j)) {
            enter = j;
            break;
          }
        }
      } else {
        double most_negative = -kCostEps;
        for (int j = 0; j < cols; ++j) {
          if (reduced[j] < most_negative && !in_basis(j)) {
            most_negative = reduced[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return;

      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (t_(i, enter) <= kPivotEps) continue;
        const double ratio = t_(i, n_ + m_) / t_(i, enter);
        bool better = false;
        if (leave < 0 || ratio < best_ratio - 1e-12) {
          better = true;
        } else if (ratio <= best_ratio + 1e-12) {
          better = bland ? basis_[i] < basis_[leave]
                         : std::abs(t_(i, enter)) > std::abs(t_(leave, enter));
        }
        if (better) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw Error("simplex: unbounded program");
      pivot(leave, enter);

      const double value = objective(cost);
      if (value < last_value - 1e-13) {
        stalled = 0;
        last_value = value;
      } else if (++stalled > stall_limit) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > kPivotEps && !in_basis(j)) {
          enter = j;
          break;
        }
      }
      // A fully zero row is redundant; the artificial stays basic at zero.
      if (enter >= 0) pivot(i, enter);
    }
  }

  bool in_basis(int j) const {
    for (int i = 0; i < m_; ++i)
      if (basis_[i] == j) return true;
    return false;
  }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double factor = t_(i, col);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
    }
    basis_[row] = col;
  }

  int m_ = 0, n_ = 0;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

double symmetrization_violation(const AvcView& avc, const Eigen::MatrixXd& tau) {
  const int nx = avc.honest_size();
  const int nt = avc.jammer_size();
  if (tau.rows() != nx || tau.cols() != nt)
    throw DimensionMismatch("symmetrization_violation: tau shape mismatch");
  const int d = avc.out_dim();
  double worst = 0.0;
  for (int x = 0; x < nx; ++x) {
    for (int xp = x + 1; xp < nx; ++xp) {
      CMatrix lhs = CMatrix::Zero(d, d);
      CMatrix rhs = CMatrix::Zero(d, d);
      for (int t = 0; t < nt; ++t) {
        lhs += tau(x, t) * avc.state(xp, t).mat();
        rhs += tau(xp, t) * avc.state(x, t).mat();
      }
      const CMatrix diff = lhs - rhs;
      worst = std::max(worst,
                       std::max(diff.real().cwiseAbs().maxCoeff(), diff.imag().cwiseAbs().maxCoeff()));
    }
  }
  return worst;
}

SymVerdict check_symmetrizable(const AvcView& avc, double epsilon) {
  const int nx = avc.honest_size();
  const int nt = avc.jammer_size();
  const int d = avc.out_dim();

  if (nx == 1) {
    // No pairs to constrain; any tau symmetrizes.
    Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(1, nt, 1.0 / nt);
    return SymVerdict{true, 0.0, SymWitness{tau, 0.0}};
  }

  // Decision variables: tau(x,t) at index x*nt + t, then the bound s.
  const int n_tau = nx * nt;

  // Inequality rows: for each pair x < x', Hermitian-upper entry (i <= j),
  // part (re always, im for i < j), sign: +/- (entry difference) - s <= 0.
  // Each gets a slack, turning it into an equality with rhs 0.
  struct Row {
    RVector coeff;  // over tau variables and s
    // rhs is always 0 for these rows
  };
  std::vector<Row> ineq;
  for (int x = 0; x < nx; ++x) {
    for (int xp = x + 1; xp < nx; ++xp) {
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          for (int part = 0; part < (i == j ? 1 : 2); ++part) {
            RVector base = RVector::Zero(n_tau + 1);
            for (int t = 0; t < nt; ++t) {
              const Complex lhs = avc.state(xp, t).mat()(i, j);
              const Complex rhs = avc.state(x, t).mat()(i, j);
              base[x * nt + t] += (part == 0 ? lhs.real() : lhs.imag());
              base[xp * nt + t] -= (part == 0 ? rhs.real() : rhs.imag());
            }
            for (int sign = 0; sign < 2; ++sign) {
              RVector coeff = (sign == 0) ? base : RVector(-base);
              coeff[n_tau] = -1.0;  // ... - s <= 0
              ineq.push_back(Row{std::move(coeff)});
            }
          }
        }
      }
    }
  }

  const int m = nx + static_cast<int>(ineq.size());
  const int n = n_tau + 1 + static_cast<int>(ineq.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  RVector b = RVector::Zero(m);
  for (int x = 0; x < nx; ++x) {
    for (int t = 0; t < nt; ++t) a(x, x * nt + t) = 1.0;
    b[x] = 1.0;
  }
  for (std::size_t r = 0; r < ineq.size(); ++r) {
    const int row = nx + static_cast<int>(r);
    a.row(row).head(n_tau + 1) = ineq[r].coeff;
    a(row, n_tau + 1 + static_cast<int>(r)) = 1.0;  // slack
  }
  RVector c = RVector::Zero(n);
  c[n_tau] = 1.0;  // minimize s

  SimplexTableau tableau(a, b);
  const LpResult lp = tableau.solve(c);

  Eigen::MatrixXd tau(nx, nt);
  for (int x = 0; x < nx; ++x)
    for (int t = 0; t < nt; ++t) tau(x, t) = std::max(0.0, lp.x[x * nt + t]);
  for (int x = 0; x < nx; ++x) {
    const double row_sum = tau.row(x).sum();
    if (row_sum > 0.0) tau.row(x) /= row_sum;
  }

  if (lp.value > epsilon) return SymVerdict{false, lp.value, std::nullopt};

  // Polish the witness: the simplex walk leaves rounding in the extracted
  // tau, so alternate projections between the affine solution space of the
  // symmetrizing equations (plus row sums) and the nonnegative orthant.
  const int rows_b = static_cast<int>(ineq.size()) / 2 + nx;
  Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(rows_b, n_tau);
  RVector cvec = RVector::Zero(rows_b);
  int row = 0;
  for (std::size_t r = 0; r < ineq.size(); r += 2)  // one of each +/- pair
    bmat.row(row++) = ineq[r].coeff.head(n_tau).transpose();
  for (int x = 0; x < nx; ++x) {
    for (int t = 0; t < nt; ++t) bmat(row, x * nt + t) = 1.0;
    cvec[row++] = 1.0;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(bmat);
  RVector flat(n_tau);
  for (int x = 0; x < nx; ++x)
    for (int t = 0; t < nt; ++t) flat[x * nt + t] = tau(x, t);
  for (int iter = 0; iter < 300; ++iter) {
    flat -= cod.solve(RVector(bmat * flat - cvec));
    bool nonneg = true;
    for (int i = 0; i < n_tau; ++i) {
      if (flat[i] < 0.0) {
        flat[i] = 0.0;
        nonneg = false;
      }
    }
    if (nonneg && (bmat * flat - cvec).cwiseAbs().maxCoeff() <= 1e-13) break;
  }
  Eigen::MatrixXd polished(nx, nt);
  for (int x = 0; x < nx; ++x)
    for (int t = 0; t < nt; ++t) polished(x, t) = std::max(0.0, flat[x * nt + t]);
  for (int x = 0; x < nx; ++x) {
    const double row_sum = polished.row(x).sum();
    if (row_sum > 0.0) polished.row(x) /= row_sum;
  }

  const double lp_violation = symmetrization_violation(avc, tau);
  const double polished_violation = symmetrization_violation(avc, polished);
  if (polished_violation < lp_violation) tau = polished;
  const double witness_violation = std::min(lp_violation, polished_violation);
  return SymVerdict{true, witness_violation, SymWitness{tau, witness_violation}};
}

namespace {

// min over pairs x != x' of the bilinear overlap for a given tau.
double min_pair_overlap(const AvcView& avc, const Eigen::MatrixXd& tau) {
  const int nx = avc.honest_size();
  const int nt = avc.jammer_size();
  double worst = std::numeric_limits<double>::infinity();
  for (int x = 0; x < nx; ++x) {
    for (int xp = x + 1; xp < nx; ++xp) {
      double value = 0.0;
      for (int t = 0; t < nt; ++t) {
        if (tau(x, t) == 0.0) continue;
        for (int tp = 0; tp < nt; ++tp) {
          if (tau(xp, tp) == 0.0) continue;
          value += tau(x, t) * tau(xp, tp) *
                   (avc.state(xp, t).mat() * avc.state(x, tp).mat()).trace().real();
        }
      }
      worst = std::min(worst, value);
    }
  }
  return worst;
}

}  // namespace

OrthVerdict check_orthogonally_symmetrizable(const AvcView& avc, int search_budget, Rng& rng) {
  const int nx = avc.honest_size();
  const int nt = avc.jammer_size();

  if (nx == 1) {
    // No pairs; the defining condition is vacuous.
    Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(1, nt, 1.0 / nt);
    return OrthVerdict{OrthKind::Witness, tau, std::nullopt, std::numeric_limits<double>::infinity()};
  }

  // Certification: a pair with all cross overlaps zero defeats every tau,
  // since tr(PQ) >= 0 for PSD P, Q makes the bilinear form monotone.
  for (int x = 0; x < nx; ++x) {
    for (int xp = x + 1; xp < nx; ++xp) {
      double max_overlap = 0.0;
      for (int t = 0; t < nt; ++t)
        for (int tp = 0; tp < nt; ++tp)
          max_overlap = std::max(
              max_overlap, (avc.state(xp, t).mat() * avc.state(x, tp).mat()).trace().real());
      if (max_overlap <= 1e-12)
        return OrthVerdict{OrthKind::CertifiedNot, std::nullopt, std::make_pair(x, xp), 0.0};
    }
  }

  const auto try_tau = [&](const Eigen::MatrixXd& tau) -> std::optional<OrthVerdict> {
    const double value = min_pair_overlap(avc, tau);
    if (value > 1e-10) return OrthVerdict{OrthKind::Witness, tau, std::nullopt, value};
    return std::nullopt;
  };

  if (auto v = try_tau(Eigen::MatrixXd::Constant(nx, nt, 1.0 / nt))) return *v;

  for (int attempt = 0; attempt < search_budget; ++attempt) {
    Eigen::MatrixXd tau(nx, nt);
    for (int x = 0; x < nx; ++x) {
      double row_sum = 0.0;
      for (int t = 0; t < nt; ++t) {
        const double g = -std::log(1.0 - rng.uniform() + 1e-300);
        tau(x, t) = g;
        row_sum += g;
      }
      tau.row(x) /= row_sum;
    }
    if (auto v = try_tau(tau)) return *v;
  }
  return OrthVerdict{OrthKind::Unknown, std::nullopt, std::nullopt, 0.0};
}

}  // namespace byzmac
