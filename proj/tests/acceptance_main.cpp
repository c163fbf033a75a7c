// Acceptance suite: one criterion per check, one PASS/FAIL line each.
// Exit code 0 iff every criterion passes.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "byzmac/cli.hpp"
#include "byzmac/simulator.hpp"
#include "test_support.hpp"

using namespace byzmac;
using namespace byzmac::testing;

namespace {

constexpr double kLog2_3 = 1.5849625007211562;

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool expect(bool ok, const std::string& label, std::string& detail) {
  if (!ok && detail.empty()) detail = label;
  return ok;
}

// --- criterion 1: exact reproduction of the six decoding-order cases -------

bool criterion_demo(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<DemoCaseResult> rows = paper_example_demo();
  const double elapsed = seconds_since(start);
  bool ok = rows.size() == 6;
  for (const DemoCaseResult& row : rows)
    ok = expect(row.passed, "case " + row.name + " failed", detail) && ok;
  const DemoCaseResult& c2c = rows.back();
  ok = expect(c2c.worst_symbol == std::vector<int>{2}, "2c worst symbol", detail) && ok;
  ok = expect(std::abs(c2c.final_stage_outcome_dist.at(0) - 0.5) <= 1e-12 &&
                  std::abs(c2c.final_stage_outcome_dist.at(1) - 0.5) <= 1e-12,
              "2c stage-2 outcome distribution", detail) && ok;
  ok = expect(elapsed < 1.0, "runtime " + std::to_string(elapsed) + "s >= 1s", detail) && ok;
  std::ostringstream s;
  s << "six cases exact, runtime " << elapsed << "s";
  if (ok) detail = s.str();
  return ok;
}

// --- criterion 2: POVM algebra ---------------------------------------------

bool criterion_povm_algebra(std::string& detail) {
  auto [d1, d2] = example_povms();
  bool ok = true;
  for (const Povm* povm : {&d1, &d2}) {
    CMatrix sum = CMatrix::Zero(6, 6);
    for (int m = 0; m < povm->size(); ++m) sum += povm->element(m);
    ok = expect((sum - identity(6)).cwiseAbs().maxCoeff() <= 1e-9, "completeness", detail) && ok;

    const QuantumChannel induced = induced_channel(*povm);
    CMatrix tp = CMatrix::Zero(6, 6);
    for (const CMatrix& k : induced.kraus()) tp += k.adjoint() * k;
    ok = expect((tp - identity(6)).cwiseAbs().maxCoeff() <= 1e-9, "trace preservation", detail) && ok;

    Rng rng(201);
    for (int trial = 0; trial < 50; ++trial) {
      const DensityOperator rho = random_state(6, rng);
      ok = expect(std::abs(induced.apply(rho).mat().trace().real() - 1.0) <= 1e-9,
                  "trace of mapped state", detail) && ok;
    }
  }
  if (ok) detail = "built-in decoders complete, induced channels trace preserving";
  return ok;
}

// --- criterion 3: entropic identities ---------------------------------------

bool criterion_entropic(std::string& detail) {
  Rng rng(202);
  bool ok = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_int(5));       // <= 6
    const int symbols = 2 + static_cast<int>(rng.uniform_int(3));   // <= 4
    const std::vector<DensityOperator> states = random_cq_states(symbols, dim, rng);
    const RVector p = random_dist(symbols, rng);

    const double chi = holevo(states, p);
    const double mi = mutual_info(states, p);
    worst_gap = std::max(worst_gap, std::abs(chi - mi));
    ok = expect(std::abs(chi - mi) <= 1e-9, "holevo vs mutual_info", detail) && ok;
    ok = expect(chi >= -1e-11, "chi >= 0", detail) && ok;

    CMatrix avg = CMatrix::Zero(dim, dim);
    for (int x = 0; x < symbols; ++x) avg += p[x] * states[x].mat();
    ok = expect(chi <= von_neumann_entropy(DensityOperator(hermitize(avg))) + 1e-11,
                "chi <= S(avg)", detail) && ok;

    ok = expect(std::abs(relative_entropy(states[0], states[0])) <= 1e-10, "D(rho||rho)", detail) && ok;
  }
  // Support-violating pairs are Infinite.
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_int(5));
    const CMatrix u = random_unitary(dim, rng);
    const DensityOperator a = DensityOperator::pure(u.col(0));
    const DensityOperator b = DensityOperator::pure(u.col(1));
    ok = expect(std::isinf(relative_entropy(a, b)), "orthogonal pair must be Infinite", detail) && ok;
  }
  if (ok) {
    std::ostringstream s;
    s << "500 channels, max |chi - I| = " << worst_gap;
    detail = s.str();
  }
  return ok;
}

// --- criterion 4: gentle measurement ----------------------------------------

bool criterion_gentle(std::string& detail) {
  Rng rng(203);
  int accepted = 0;
  int violations = 0;
  double max_ratio = 0.0;
  while (accepted < 1000) {
    const int dim = 2 + static_cast<int>(rng.uniform_int(5));
    const DensityOperator rho = random_state(dim, rng);
    const CMatrix d = random_gentle_operator(dim, rng, 0.2 * rng.uniform());
    if ((d * rho.mat()).trace().real() < 0.9) continue;
    ++accepted;
    const GentleMeasurementReport rep = gentle_measurement_check(d, rho);
    if (!rep.holds) ++violations;
    if (rep.bound > 0.0) max_ratio = std::max(max_ratio, rep.trace_distance / rep.bound);
  }
  const bool ok = violations == 0;
  std::ostringstream s;
  s << "1000 instances, violations = " << violations << ", max T/bound = " << max_ratio;
  detail = s.str();
  return ok;
}

// --- criterion 5: example-channel region ------------------------------------

bool criterion_region(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  auto [d1, d2] = example_povms();
  const OptimizerConfig cfg;  // default optimizer configuration
  const RateRegion region = region_2user(example_channel(), {0, 1}, d1, cfg);
  const double elapsed = seconds_since(start);

  const double r1 = region.bound_for(0).rate_bits;
  const double r2 = region.bound_for(1).rate_bits;
  bool ok = true;
  ok = expect(std::abs(r1 - 1.0) <= 0.02, "R1 off target", detail) && ok;
  ok = expect(std::abs(r2 - kLog2_3) <= 0.02, "R2 off target", detail) && ok;
  ok = expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s >= 30s", detail) && ok;
  std::ostringstream s;
  s << "R1 = " << r1 << ", R2 = " << r2 << ", runtime " << elapsed << "s";
  if (ok) detail = s.str();
  return ok;
}

// --- criterion 6: symmetrizability ------------------------------------------

bool criterion_symmetrizability(std::string& detail) {
  bool ok = true;

  const SymVerdict example = check_symmetrizable(example_channel().avc_view(0, 1));
  ok = expect(!example.symmetrizable, "example must not be symmetrizable", detail) && ok;
  ok = expect(example.slack >= 0.1, "example LP slack below 0.1", detail) && ok;

  Rng rng(204);
  const DensityOperator sigma = random_state(3, rng);
  std::vector<DensityOperator> constant_table(6, sigma);
  const SymVerdict constant = check_symmetrizable(AvcView(2, 3, std::move(constant_table)));
  ok = expect(constant.symmetrizable && constant.slack <= 1e-10, "constant channel", detail) && ok;

  double worst_slack = 0.0;
  for (int plant = 0; plant < 100; ++plant) {
    const int nx = 2 + static_cast<int>(rng.uniform_int(3));
    const int nt = 2 + static_cast<int>(rng.uniform_int(3));
    const int dim = 2 + static_cast<int>(rng.uniform_int(2));
    std::vector<DensityOperator> jam;
    for (int t = 0; t < nt; ++t) jam.push_back(random_state(dim, rng));
    Eigen::MatrixXd tau(nx, nt);
    for (int x = 0; x < nx; ++x) tau.row(x) = random_dist(nt, rng).transpose();
    std::vector<DensityOperator> table;
    for (int x = 0; x < nx; ++x) {
      CMatrix mixed = CMatrix::Zero(dim, dim);
      for (int s = 0; s < nt; ++s) mixed += tau(x, s) * jam[s].mat();
      for (int t = 0; t < nt; ++t)
        table.push_back(DensityOperator(hermitize(0.5 * (jam[t].mat() + mixed))));
    }
    const SymVerdict verdict = check_symmetrizable(AvcView(nx, nt, std::move(table)));
    worst_slack = std::max(worst_slack, verdict.slack);
    ok = expect(verdict.symmetrizable && verdict.slack <= 1e-10,
                "planted instance " + std::to_string(plant), detail) && ok;
  }
  if (ok) {
    std::ostringstream s;
    s << "example slack " << example.slack << ", 100 plants, worst plant slack " << worst_slack;
    detail = s.str();
  }
  return ok;
}

// --- criterion 7: orthogonal symmetrizability --------------------------------

bool criterion_orthogonal(std::string& detail) {
  Rng rng(205);
  bool ok = true;
  const OrthVerdict example =
      check_orthogonally_symmetrizable(example_channel().avc_view(1, 0), 500, rng);
  ok = expect(example.kind == OrthKind::CertifiedNot, "example view must be CertifiedNot", detail) && ok;

  std::vector<DensityOperator> mixed_table(6, DensityOperator::maximally_mixed(4));
  const OrthVerdict mixed = check_orthogonally_symmetrizable(AvcView(2, 3, std::move(mixed_table)),
                                                             500, rng);
  ok = expect(mixed.kind == OrthKind::Witness, "maximally mixed fixture needs a witness", detail) && ok;
  if (ok) detail = "example CertifiedNot, maximally-mixed Witness";
  return ok;
}

// --- criterion 8: Monte Carlo consistency ------------------------------------

bool criterion_monte_carlo(std::string& detail) {
  auto [d1, d2] = example_povms();
  bool ok = true;
  double worst_sigmas = 0.0;

  const auto check_setup = [&](SimSetup setup, std::uint64_t seed) {
    const auto exact = exact_error(setup);
    ok = expect(exact.has_value(), "fixture must be exactly tractable", detail) && ok;
    if (!exact) return;
    Rng rng(seed);
    const ErrorReport report = error_probability(setup, 100000, rng);
    for (int i = 0; i < setup.base.senders(); ++i) {
      if (!report.mc[i] || !exact->error[i]) continue;
      const double p = *exact->error[i];
      const double sigma = std::sqrt(std::max(p * (1.0 - p) / 100000.0, 1e-12));
      const double gap = std::abs(report.mc[i]->estimate - p);
      worst_sigmas = std::max(worst_sigmas, gap / sigma);
      ok = expect(gap <= 3.0 * sigma, "MC outside 3 sigma", detail) && ok;
    }
  };

  const auto make = [&](const std::vector<int>& order, std::optional<int> adversary,
                        AdversaryStrategy strategy) {
    RandomCode code1(0, {{0}, {1}}, {{0}}, d1);
    RandomCode code2(1, {{0}, {1}}, {{0}}, d2);
    SimSetup setup{example_channel(), 1, {code1, code2}, order, adversary, std::move(strategy)};
    return setup;
  };

  check_setup(make({1, 0}, 1, AdversaryStrategy::fixed({2})), 31);
  check_setup(make({0, 1}, std::nullopt, {}), 32);
  check_setup(make({0, 1}, 1, AdversaryStrategy::fixed({1})), 33);
  check_setup(make({1, 0}, 1, AdversaryStrategy::honest(RVector::Constant(2, 0.5))), 34);

  // Byte-identical CSV for identical seeds.
  const std::vector<std::string> args{"simulate", "--channel", "example", "--order", "2,1",
                                      "--adversary", "2:fixed:2", "--trials", "100000", "--seed",
                                      "99", "--povm", "1=example", "--povm", "2=example",
                                      "--messages", "2,2"};
  std::ostringstream out_a, out_b, err_a, err_b;
  ok = expect(run_cli(args, out_a, err_a) == 0, "simulate exit code", detail) && ok;
  ok = expect(run_cli(args, out_b, err_b) == 0, "simulate exit code", detail) && ok;
  ok = expect(out_a.str() == out_b.str(), "CSV not byte-identical", detail) && ok;

  if (ok) {
    std::ostringstream s;
    s << "four fixtures at 1e5 trials, worst deviation " << worst_sigmas
      << " sigma; identical-seed CSV byte-identical";
    detail = s.str();
  }
  return ok;
}

// --- criterion 9: desk-scale substitutes for asymptotic attainment ------------

bool criterion_consistency(std::string& detail) {
  bool ok = true;

  auto [d1, d2] = example_povms();
  OptimizerConfig cfg;
  cfg.grid_resolution = 6;
  cfg.refinement_rounds = 8;

  // k = 2 engine agreement on both decode orders.
  for (const auto& order : std::vector<std::vector<int>>{{0, 1}, {1, 0}}) {
    const Povm& stage1 = (order[0] == 0) ? d1 : d2;
    const RateRegion direct = region_2user(example_channel(), order, stage1, cfg);
    const RateRegion general = region_kuser(example_channel(), order, {stage1}, cfg);
    for (int sender = 0; sender < 2; ++sender)
      ok = expect(std::abs(direct.bound_for(sender).rate_bits -
                           general.bound_for(sender).rate_bits) <= 1e-12,
                  "2-user vs k-user mismatch", detail) && ok;
  }

  // k = 3 wrapper agreement on a factorized fixture.
  std::vector<DensityOperator> table;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        table.push_back(DensityOperator(tensor(tensor(basis_projector(2, a), basis_projector(2, b)),
                                               basis_projector(2, c))));
  const CqMacChannel fact({2, 2, 2}, std::move(table));
  const Povm s0({tensor(basis_projector(2, 0), identity(4)), tensor(basis_projector(2, 1), identity(4))});
  const Povm s1({tensor(tensor(identity(2), basis_projector(2, 0)), identity(2)),
                 tensor(tensor(identity(2), basis_projector(2, 1)), identity(2))});
  OptimizerConfig small = cfg;
  small.grid_resolution = 4;
  small.refinement_rounds = 4;
  const RateRegion r3 = region_3user(fact, {0, 1, 2}, {s0, s1}, small);
  const RateRegion rk = region_kuser(fact, {0, 1, 2}, {s0, s1}, small);
  for (int sender = 0; sender < 3; ++sender)
    ok = expect(std::abs(r3.bound_for(sender).rate_bits - rk.bound_for(sender).rate_bits) <= 1e-12,
                "3-user vs k-user mismatch", detail) && ok;

  // Data-processing monotonicity on 500 random (Q, V, p) triples.
  Rng rng(206);
  double worst_excess = -1.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_int(4));
    const int symbols = 2 + static_cast<int>(rng.uniform_int(3));
    const CqMacChannel v = random_single_sender_channel(symbols, dim, rng);
    const QuantumChannel q = random_tp_channel(dim, 2 + static_cast<int>(rng.uniform_int(2)), rng);
    const InputDistribution p(0, random_dist(symbols, rng));
    const double excess = holevo(p, v.post_compose(q)) - holevo(p, v);
    worst_excess = std::max(worst_excess, excess);
    ok = expect(excess <= 1e-9, "data processing violated", detail) && ok;
  }

  if (ok) {
    std::ostringstream s;
    s << "region engines agree to 1e-12; 500 data-processing triples, max excess "
      << worst_excess;
    detail = s.str();
  }
  return ok;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::fmtflags(0), std::ios::floatfield);
  std::cout.precision(6);

  const std::vector<Check> checks{
      {"criterion 1: decoding-order demo reproduced exactly", criterion_demo},
      {"criterion 2: POVM completeness and induced-channel algebra", criterion_povm_algebra},
      {"criterion 3: entropic identities on random channels", criterion_entropic},
      {"criterion 4: gentle-measurement bound", criterion_gentle},
      {"criterion 5: example-channel capacity region", criterion_region},
      {"criterion 6: symmetrizability certification", criterion_symmetrizability},
      {"criterion 7: orthogonal symmetrizability verdicts", criterion_orthogonal},
      {"criterion 8: Monte Carlo consistency and reproducibility", criterion_monte_carlo},
      {"criterion 9: engine agreement and data-processing properties", criterion_consistency},
  };

  int failures = 0;
  for (const Check& check : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = check.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << check.name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
  }
  return failures == 0 ? 0 : 1;
}
