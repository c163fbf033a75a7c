#include <doctest.h>

#include "byzmac/capacity.hpp"
#include "test_support.hpp"

using namespace byzmac;
using namespace byzmac::testing;

namespace {

constexpr double kLog2_3 = 1.5849625007211562;

OptimizerConfig fast_cfg() {
  OptimizerConfig cfg;
  cfg.grid_resolution = 6;  // divisible by 2 and 3 so uniform points are on the lattice
  cfg.refinement_rounds = 8;
  cfg.tolerance = 1e-6;
  return cfg;
}

CqMacChannel random_mac(std::vector<int> sizes, int dim, Rng& rng) {
  long long total = 1;
  for (int s : sizes) total *= s;
  std::vector<DensityOperator> table;
  for (long long i = 0; i < total; ++i) table.push_back(random_state(dim, rng));
  return CqMacChannel(std::move(sizes), std::move(table));
}

// W(x1,x2,x3) = |x1><x1| (x) |x2><x2| (x) f3(x3) with per-sender local
// stage POVMs; the third factor is configurable to exercise degeneracy.
CqMacChannel factorized3(const std::vector<CMatrix>& third_factor) {
  std::vector<DensityOperator> table;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < static_cast<int>(third_factor.size()); ++c)
        table.push_back(DensityOperator(
            tensor(tensor(basis_projector(2, a), basis_projector(2, b)), third_factor[c])));
  return CqMacChannel({2, 2, static_cast<int>(third_factor.size())}, std::move(table));
}

Povm local_povm_slot0_of3() {
  return Povm({tensor(basis_projector(2, 0), identity(4)), tensor(basis_projector(2, 1), identity(4))});
}

Povm local_povm_slot1_of3() {
  return Povm({tensor(tensor(identity(2), basis_projector(2, 0)), identity(2)),
               tensor(tensor(identity(2), basis_projector(2, 1)), identity(2))});
}

}  // namespace

TEST_CASE("maxmin rate of the example channel, sender 1 honest") {
  const MaxminResult r = maxmin_rate(example_channel(), 0, 1, {}, std::nullopt, fast_cfg());
  CHECK(r.rate == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.p[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(r.diag.budget_exhausted);
}

TEST_CASE("maxmin rate of the example channel, sender 2 honest behind the stage-1 channel") {
  auto [d1, d2] = example_povms();
  const MaxminResult r =
      maxmin_rate(example_channel(), 1, 0, {}, induced_channel(d1), fast_cfg());
  CHECK(r.rate == doctest::Approx(kLog2_3).epsilon(1e-9));
  for (int x = 0; x < 3; ++x) CHECK(r.p[x] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("maxmin rate of a constant channel is zero") {
  Rng rng(81);
  const DensityOperator sigma = random_state(3, rng);
  std::vector<DensityOperator> table(6, sigma);
  const CqMacChannel constant({2, 3}, std::move(table));
  CHECK(maxmin_rate(constant, 0, 1, {}, std::nullopt, fast_cfg()).rate <= 1e-10);
  CHECK(maxmin_rate(constant, 1, 0, {}, std::nullopt, fast_cfg()).rate <= 1e-10);
}

TEST_CASE("two-user region in decode order 1,2 with the built-in stage POVM") {
  auto [d1, d2] = example_povms();
  const RateRegion region = region_2user(example_channel(), {0, 1}, d1, fast_cfg());
  CHECK(region.bound_for(0).rate_bits == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(region.bound_for(1).rate_bits == doctest::Approx(kLog2_3).epsilon(1e-9));
}

TEST_CASE("two-user region in decode order 2,1 collapses sender 1") {
  auto [d1, d2] = example_povms();
  const RateRegion region = region_2user(example_channel(), {1, 0}, d2, fast_cfg());
  CHECK(region.bound_for(1).rate_bits == doctest::Approx(kLog2_3).epsilon(1e-9));
  // The stage-2 disturbance makes sender 1's worst-case rate collapse; the
  // adversary's best letter erases the A factor entirely.
  CHECK(region.bound_for(0).rate_bits < 1.0 - 0.5);
  CHECK(region.bound_for(0).rate_bits <= 1e-9);
}

TEST_CASE("identity stage POVM makes the second bound match the raw max-min") {
  Rng rng(82);
  const CqMacChannel ch = random_mac({2, 3}, 4, rng);
  const RateRegion region = region_2user(ch, {0, 1}, Povm({identity(4)}), fast_cfg());
  const MaxminResult raw = maxmin_rate(ch, 1, 0, {}, std::nullopt, fast_cfg());
  CHECK(std::abs(region.bound_for(1).rate_bits - raw.rate) <= 1e-12);
}

TEST_CASE("k-user engine reduces to the two-user region exactly") {
  auto [d1, d2] = example_povms();
  const CqMacChannel ch = example_channel();
  const OptimizerConfig cfg = fast_cfg();

  for (const auto& order : std::vector<std::vector<int>>{{0, 1}, {1, 0}}) {
    const Povm& stage1 = (order[0] == 0) ? d1 : d2;
    const RateRegion direct = region_2user(ch, order, stage1, cfg);
    const RateRegion general = region_kuser(ch, order, {stage1}, cfg);
    for (int sender = 0; sender < 2; ++sender) {
      CHECK(std::abs(direct.bound_for(sender).rate_bits -
                     general.bound_for(sender).rate_bits) <= 1e-12);
    }
  }
}

TEST_CASE("three-user factorized fixture reaches log2 of each alphabet") {
  const CqMacChannel ch = factorized3({basis_projector(2, 0), basis_projector(2, 1)});
  const RateRegion region =
      region_3user(ch, {0, 1, 2}, {local_povm_slot0_of3(), local_povm_slot1_of3()}, fast_cfg());
  for (int sender = 0; sender < 3; ++sender)
    CHECK(region.bound_for(sender).rate_bits == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate third slot carries zero rate") {
  // Both symbols of slot 3 emit the same factor state.
  const CqMacChannel ch = factorized3({basis_projector(2, 0), basis_projector(2, 0)});
  const RateRegion region =
      region_3user(ch, {0, 1, 2}, {local_povm_slot0_of3(), local_povm_slot1_of3()}, fast_cfg());
  CHECK(region.bound_for(2).rate_bits <= 1e-10);
  CHECK(region.bound_for(0).rate_bits == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("three-user wrapper equals the k-user engine") {
  const CqMacChannel ch = factorized3({basis_projector(2, 0), basis_projector(2, 1)});
  const std::vector<Povm> povms{local_povm_slot0_of3(), local_povm_slot1_of3()};
  const RateRegion a = region_3user(ch, {0, 1, 2}, povms, fast_cfg());
  const RateRegion b = region_kuser(ch, {0, 1, 2}, povms, fast_cfg());
  for (int sender = 0; sender < 3; ++sender)
    CHECK(a.bound_for(sender).rate_bits == b.bound_for(sender).rate_bits);
}

TEST_CASE("embedded two-user subchannel: collapsed branches reproduce the 2-user region") {
  // Third sender with a one-letter alphabet: the 3-user machinery runs with
  // its conditional branches collapsed, and must reproduce the 2-user rates.
  auto [d1, d2] = example_povms();
  const CqMacChannel two = example_channel();
  std::vector<DensityOperator> table;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) table.push_back(two.apply({i, j}));
  const CqMacChannel three({2, 3, 1}, std::move(table));

  const RateRegion embedded = region_3user(three, {0, 1, 2}, {d1, d2}, fast_cfg());
  const RateRegion direct = region_2user(two, {0, 1}, d1, fast_cfg());
  CHECK(std::abs(embedded.bound_for(0).rate_bits - direct.bound_for(0).rate_bits) <= 1e-9);
  CHECK(std::abs(embedded.bound_for(1).rate_bits - direct.bound_for(1).rate_bits) <= 1e-9);
  CHECK(embedded.bound_for(2).rate_bits <= 1e-10);

  // The statement-form flag drops the honest sandwiches, which are no-ops on
  // this fixture.
  RegionOptions statement;
  statement.statement_form = true;
  const RateRegion alt = region_3user(three, {0, 1, 2}, {d1, d2}, fast_cfg(), statement);
  CHECK(std::abs(alt.bound_for(1).rate_bits - direct.bound_for(1).rate_bits) <= 1e-9);
}

TEST_CASE("four-user factorized fixture") {
  std::vector<DensityOperator> table;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          table.push_back(DensityOperator(
              tensor(tensor(basis_projector(2, a), basis_projector(2, b)),
                     tensor(basis_projector(2, c), basis_projector(2, d)))));
  const CqMacChannel ch({2, 2, 2, 2}, std::move(table));

  const auto local = [&](int slot) {
    std::vector<CMatrix> elements;
    for (int m = 0; m < 2; ++m) {
      CMatrix e = CMatrix::Ones(1, 1);
      for (int s = 0; s < 4; ++s)
        e = tensor(e, s == slot ? basis_projector(2, m) : identity(2));
      elements.push_back(e);
    }
    return Povm(std::move(elements));
  };

  OptimizerConfig cfg = fast_cfg();
  cfg.grid_resolution = 4;
  cfg.refinement_rounds = 4;
  const RateRegion region = region_kuser(ch, {0, 1, 2, 3}, {local(0), local(1), local(2)}, cfg);
  for (int sender = 0; sender < 4; ++sender)
    CHECK(region.bound_for(sender).rate_bits == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("k-user preconditions") {
  Rng rng(83);
  const CqMacChannel five = random_mac({1, 1, 1, 1, 2}, 2, rng);
  CHECK_THROWS_AS(region_kuser(five, {0, 1, 2, 3, 4}, {}, fast_cfg()), KTooLarge);

  const CqMacChannel three = random_mac({2, 2, 2}, 2, rng);
  CHECK_THROWS_AS(region_kuser(three, {0, 1, 2}, {Povm({identity(2)})}, fast_cfg()),
                  MissingStagePovm);
}

TEST_CASE("enlarging the adversary alphabet never raises the max-min rate") {
  Rng rng(84);
  for (int trial = 0; trial < 8; ++trial) {
    const CqMacChannel small = random_mac({2, 2}, 3, rng);
    std::vector<DensityOperator> table;
    for (int x = 0; x < 2; ++x) {
      for (int t = 0; t < 2; ++t) table.push_back(small.apply({x, t}));
      table.push_back(random_state(3, rng));
    }
    const CqMacChannel big({2, 3}, std::move(table));
    const double r_small = maxmin_rate(small, 0, 1, {}, std::nullopt, fast_cfg()).rate;
    const double r_big = maxmin_rate(big, 0, 1, {}, std::nullopt, fast_cfg()).rate;
    CHECK(r_big <= r_small + 1e-9);
  }
}

TEST_CASE("max-min value is invariant under relabeling the honest alphabet") {
  Rng rng(85);
  const CqMacChannel ch = random_mac({3, 2}, 3, rng);
  std::vector<DensityOperator> permuted;
  const std::vector<int> relabel{2, 0, 1};
  for (int x = 0; x < 3; ++x)
    for (int t = 0; t < 2; ++t) permuted.push_back(ch.apply({relabel[x], t}));
  const CqMacChannel chp({3, 2}, std::move(permuted));
  const double a = maxmin_rate(ch, 0, 1, {}, std::nullopt, fast_cfg()).rate;
  const double b = maxmin_rate(chp, 0, 1, {}, std::nullopt, fast_cfg()).rate;
  CHECK(std::abs(a - b) <= 1e-6);
}

TEST_CASE("post-channel never raises the max-min rate") {
  Rng rng(86);
  for (int trial = 0; trial < 6; ++trial) {
    const CqMacChannel ch = random_mac({2, 2}, 3, rng);
    const QuantumChannel q = random_tp_channel(3, 2, rng);
    const double with_post = maxmin_rate(ch, 0, 1, {}, q, fast_cfg()).rate;
    const double without = maxmin_rate(ch, 0, 1, {}, std::nullopt, fast_cfg()).rate;
    CHECK(with_post <= without + 1e-9);
  }
}

TEST_CASE("doubling the grid changes the example rates negligibly") {
  auto [d1, d2] = example_povms();
  OptimizerConfig coarse = fast_cfg();
  OptimizerConfig fine = fast_cfg();
  fine.grid_resolution = 12;
  const RateRegion a = region_2user(example_channel(), {0, 1}, d1, coarse);
  const RateRegion b = region_2user(example_channel(), {0, 1}, d1, fine);
  for (int sender = 0; sender < 2; ++sender)
    CHECK(std::abs(a.bound_for(sender).rate_bits - b.bound_for(sender).rate_bits) <= 0.01);
}

TEST_CASE("exhausted budgets are flagged and still return a value") {
  OptimizerConfig tiny = fast_cfg();
  tiny.max_evals = 5;
  const MaxminResult r = maxmin_rate(example_channel(), 0, 1, {}, std::nullopt, tiny);
  CHECK(r.diag.budget_exhausted);
  CHECK(std::isfinite(r.rate));
}

TEST_CASE("corollary region holds for the example channel") {
  const CorollaryResult result = corollary_region(example_channel(), fast_cfg());
  REQUIRE(result.region.has_value());
  CHECK(result.region->bound_for(0).rate_bits == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(result.region->bound_for(1).rate_bits == doctest::Approx(kLog2_3).epsilon(1e-9));
  CHECK_FALSE(result.slot1_symmetrizability.symmetrizable);
  CHECK(result.slot2_orthogonal.kind == OrthKind::CertifiedNot);
}

TEST_CASE("corollary fails on a constant channel, naming the symmetrizable slot") {
  Rng rng(87);
  const DensityOperator sigma = random_state(3, rng);
  std::vector<DensityOperator> table(6, sigma);
  const CorollaryResult result = corollary_region(CqMacChannel({2, 3}, std::move(table)), fast_cfg());
  CHECK_FALSE(result.region.has_value());
  CHECK(result.diagnostic.find("slot 1") != std::string::npos);
}

TEST_CASE("corollary fails when the second slot's outputs overlap") {
  // W(x1, x2) = |x1><x1| (x) sigma: slot 1 stays non-symmetrizable, but the
  // slot-2 view has identical outputs, hence an orthogonal-symmetrizability
  // witness, and the hypothesis on slot 2 fails.
  Rng rng(88);
  const DensityOperator sigma = random_state(2, rng);
  std::vector<DensityOperator> table;
  for (int x = 0; x < 2; ++x)
    for (int t = 0; t < 2; ++t)
      table.push_back(DensityOperator(tensor(basis_projector(2, x), sigma.mat())));
  const CorollaryResult result = corollary_region(CqMacChannel({2, 2}, std::move(table)), fast_cfg());
  CHECK_FALSE(result.region.has_value());
  CHECK(result.diagnostic.find("slot 2") != std::string::npos);
}
