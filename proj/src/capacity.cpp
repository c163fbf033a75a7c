#include "byzmac/capacity.hpp"

#include <algorithm>

namespace byzmac {

namespace {

struct EvalBudget {
  long long remaining;
  bool exhausted = false;

  bool take() {
    if (remaining <= 0) {
      exhausted = true;
      return false;
    }
    --remaining;
    return true;
  }
};

void enumerate_grid(int dim, int resolution,
                    const std::function<void(const RVector&)>& visit) {
  RVector point(dim);
  std::vector<int> counts(dim, 0);
  // Lexicographic enumeration of compositions of `resolution` into dim parts.
  std::function<void(int, int)> recurse = [&](int slot, int left) {
    if (slot == dim - 1) {
      counts[slot] = left;
      for (int i = 0; i < dim; ++i) point[i] = static_cast<double>(counts[i]) / resolution;
      visit(point);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[slot] = c;
      recurse(slot + 1, left - c);
    }
  };
  recurse(0, resolution);
}

// Minimizes g over the probability simplex: full lattice scan, then
// pairwise mass-transfer descent with a halving step. Deterministic.
struct SimplexMin {
  double value = 0.0;
  RVector argmin;
  int depth = 0;
  double last_round_change = 0.0;
};

SimplexMin minimize_on_simplex(const std::function<double(const RVector&)>& g, int dim,
                               const OptimizerConfig& cfg, EvalBudget& budget) {
  SimplexMin best;
  best.value = std::numeric_limits<double>::infinity();
  enumerate_grid(dim, cfg.grid_resolution, [&](const RVector& p) {
    if (!budget.take()) return;
    const double v = g(p);
    if (v < best.value) {
      best.value = v;
      best.argmin = p;
    }
  });
  if (best.argmin.size() == 0) {
    best.argmin = RVector::Constant(dim, 1.0 / dim);
    best.value = budget.take() ? g(best.argmin) : std::numeric_limits<double>::infinity();
  }
  if (dim == 1) return best;

  double step = 1.0 / cfg.grid_resolution;
  for (int round = 0; round < cfg.refinement_rounds; ++round) {
    double round_change = 0.0;
    while (true) {
      // Best single mass transfer of `step` between two coordinates.
      double best_v = best.value;
      RVector best_p;
      for (int from = 0; from < dim && !budget.exhausted; ++from) {
        if (best.argmin[from] <= 0.0) continue;
        const double amount = std::min(step, best.argmin[from]);
        for (int to = 0; to < dim; ++to) {
          if (to == from) continue;
          if (!budget.take()) break;
          RVector p = best.argmin;
          p[from] -= amount;
          p[to] += amount;
          const double v = g(p);
          if (v < best_v - 1e-15) {
            best_v = v;
            best_p = p;
          }
        }
      }
      if (best_p.size() == 0) break;
      round_change += best.value - best_v;
      best.value = best_v;
      best.argmin = best_p;
      if (budget.exhausted) break;
    }
    best.depth = round + 1;
    best.last_round_change = round_change;
    step *= 0.5;
    if (round_change <= cfg.tolerance * 0.25 && round > 0) break;
    if (budget.exhausted) break;
  }
  return best;
}

}  // namespace

MaxminResult maxmin_optimize(const std::function<double(const RVector&, const RVector&)>& f,
                             int dim_p, int dim_q, const OptimizerConfig& cfg) {
  if (cfg.grid_resolution < 1 || cfg.refinement_rounds < 1 || cfg.tolerance <= 0.0 ||
      cfg.max_evals < 1)
    throw InvariantViolation("OptimizerConfig: all fields must be positive");
  EvalBudget budget{cfg.max_evals};

  // Inner minimization is exact (re-run in full) for every outer candidate.
  const auto inner = [&](const RVector& p) {
    return minimize_on_simplex([&](const RVector& q) { return f(p, q); }, dim_q, cfg, budget);
  };

  MaxminResult best;
  best.rate = -std::numeric_limits<double>::infinity();
  int inner_depth = 0;

  enumerate_grid(dim_p, cfg.grid_resolution, [&](const RVector& p) {
    if (budget.exhausted) return;
    const SimplexMin m = inner(p);
    inner_depth = std::max(inner_depth, m.depth);
    if (m.value > best.rate) {
      best.rate = m.value;
      best.p = p;
      best.q = m.argmin;
    }
  });
  if (best.p.size() == 0) {
    best.p = RVector::Constant(dim_p, 1.0 / dim_p);
    const SimplexMin m = inner(best.p);
    best.rate = m.value;
    best.q = m.argmin;
  }

  double step = 1.0 / cfg.grid_resolution;
  double last_round_change = 0.0;
  int depth = 0;
  for (int round = 0; round < cfg.refinement_rounds && dim_p > 1; ++round) {
    double round_change = 0.0;
    while (!budget.exhausted) {
      double best_v = best.rate;
      RVector best_p, best_q;
      for (int from = 0; from < dim_p && !budget.exhausted; ++from) {
        if (best.p[from] <= 0.0) continue;
        const double amount = std::min(step, best.p[from]);
        for (int to = 0; to < dim_p; ++to) {
          if (to == from || budget.exhausted) continue;
          RVector p = best.p;
          p[from] -= amount;
          p[to] += amount;
          const SimplexMin m = inner(p);
          if (m.value > best_v + 1e-15) {
            best_v = m.value;
            best_p = p;
            best_q = m.argmin;
          }
        }
      }
      if (best_p.size() == 0) break;
      round_change += best_v - best.rate;
      best.rate = best_v;
      best.p = best_p;
      best.q = best_q;
    }
    depth = round + 1;
    last_round_change = round_change;
    step *= 0.5;
    if (round_change <= cfg.tolerance * 0.25 && round > 0) break;
    if (budget.exhausted) break;
  }

  best.diag.grid_resolution = cfg.grid_resolution;
  best.diag.refinement_depth = std::max(depth, inner_depth);
  best.diag.gap_estimate = last_round_change;
  best.diag.evals = cfg.max_evals - budget.remaining;
  best.diag.budget_exhausted = budget.exhausted;
  return best;
}

MaxminResult maxmin_rate(const CqMacChannel& ch, int honest, int adversary,
                         const FrozenMap& frozen, const std::optional<QuantumChannel>& post,
                         const OptimizerConfig& cfg) {
  if (honest == adversary) throw SlotOutOfRange("maxmin_rate: honest == adversary");
  const AvcView view = ch.avc_view(honest, adversary, frozen);
  if (post && post->dim() != view.out_dim())
    throw DimensionMismatch("maxmin_rate: post-channel dimension mismatch");

  const auto objective = [&](const RVector& p, const RVector& q) {
    std::vector<DensityOperator> states;
    states.reserve(view.honest_size());
    for (int x = 0; x < view.honest_size(); ++x) {
      DensityOperator sigma = view.averaged(x, q);
      states.push_back(post ? post->apply(sigma) : std::move(sigma));
    }
    return holevo(states, p);
  };
  return maxmin_optimize(objective, view.honest_size(), view.jammer_size(), cfg);
}

const SenderBound& RateRegion::bound_for(int sender) const {
  for (const SenderBound& b : bounds)
    if (b.sender == sender) return b;
  throw SlotOutOfRange("RateRegion: no bound for sender " + std::to_string(sender));
}

namespace {

void require_order(const CqMacChannel& ch, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != ch.senders())
    throw SlotOutOfRange("decode order must list every sender once");
  std::vector<bool> seen(ch.senders(), false);
  for (int s : order) {
    if (s < 0 || s >= ch.senders() || seen[s])
      throw SlotOutOfRange("decode order is not a permutation of the senders");
    seen[s] = true;
  }
}

RVector honest_dist_for(const RegionOptions& options, const CqMacChannel& ch, int slot) {
  auto it = options.honest_dists.find(slot);
  if (it == options.honest_dists.end())
    return RVector::Constant(ch.alphabet_size(slot), 1.0 / ch.alphabet_size(slot));
  if (it->second.size() != ch.alphabet_size(slot))
    throw DimensionMismatch("honest distribution size mismatch for slot " + std::to_string(slot));
  return it->second;
}

// Conditioning distribution of an honest sender whose stage has already been
// decoded: over the full alphabet, but by default supported only on the
// symbols its stage POVM can announce (message label = sent symbol).
RVector conditioning_dist_for(const RegionOptions& options, const CqMacChannel& ch, int slot,
                              const Povm& stage_povm) {
  auto it = options.honest_dists.find(slot);
  if (it != options.honest_dists.end()) {
    if (it->second.size() != ch.alphabet_size(slot))
      throw DimensionMismatch("honest distribution size mismatch for slot " + std::to_string(slot));
    return it->second;
  }
  RVector dist = RVector::Zero(ch.alphabet_size(slot));
  int labeled = 0;
  for (int e = 0; e < stage_povm.size(); ++e) {
    const int label = stage_povm.label(e);
    if (label >= 0 && label < dist.size()) {
      dist[label] = 1.0;
      ++labeled;
    }
  }
  if (labeled == 0)
    throw MissingStagePovm("stage POVM for slot " + std::to_string(slot) +
                           " announces no alphabet symbol");
  return dist / static_cast<double>(labeled);
}

// Channel whose only remaining slot is `target`, with the adversary slot
// averaged by q and every other slot not in `keep` averaged by its honest
// distribution. Slots in `keep` (earlier honest stages) remain free.
struct WorkingChannel {
  CqMacChannel ch;
  std::map<int, int> slot_index;  // original slot -> current index
};

WorkingChannel reduce_channel(const CqMacChannel& ch, int target, int adversary, const RVector& q,
                              const std::vector<int>& keep, const RegionOptions& options) {
  WorkingChannel work{ch, {}};
  for (int s = 0; s < ch.senders(); ++s) work.slot_index[s] = s;

  for (int slot = ch.senders() - 1; slot >= 0; --slot) {
    if (slot == target || std::find(keep.begin(), keep.end(), slot) != keep.end()) continue;
    const RVector dist = (slot == adversary) ? q : honest_dist_for(options, ch, slot);
    work.ch = work.ch.average_slot(work.slot_index[slot],
                                   InputDistribution(work.slot_index[slot], dist));
    work.slot_index.erase(slot);
    for (auto& [orig, idx] : work.slot_index)
      if (orig > slot) --idx;
  }
  return work;
}

// Lueders-updates every state of a one-or-more-sender channel with a fixed
// outcome operator; returns nothing if any state makes the branch impossible.
std::optional<CqMacChannel> lueders_update_channel(const CqMacChannel& ch, const CMatrix& element,
                                                   const CMatrix& root) {
  std::vector<DensityOperator> updated;
  updated.reserve(ch.states().size());
  for (const DensityOperator& rho : ch.states()) {
    const double prob = (element * rho.mat()).trace().real();
    if (prob <= tol::zero_branch) return std::nullopt;
    CMatrix post = hermitize(root * rho.mat() * root);
    post /= post.trace().real();
    updated.emplace_back(std::move(post));
  }
  return CqMacChannel(ch.alphabet_sizes(), std::move(updated));
}

// Per-stage operators precomputed once per region evaluation.
struct StageOps {
  const Povm* povm;
  QuantumChannel induced;
  std::vector<CMatrix> roots;  // sqrt of each element
};

std::vector<StageOps> build_stage_ops(const std::vector<Povm>& stage_povms) {
  std::vector<StageOps> ops;
  ops.reserve(stage_povms.size());
  for (const Povm& p : stage_povms) {
    StageOps s{&p, induced_channel(p), {}};
    s.roots.reserve(p.size());
    for (int m = 0; m < p.size(); ++m) s.roots.push_back(mat_sqrt(p.element(m)));
    ops.push_back(std::move(s));
  }
  return ops;
}

// Conditional-Holevo objective for sender `target` against adversary slot
// `adversary` at distribution q, following the decode order.
double staged_objective(const CqMacChannel& ch, const std::vector<int>& order,
                        const std::vector<StageOps>& stage_ops, int target, int adversary,
                        const RVector& p, const RVector& q, const RegionOptions& options) {
  const int target_pos =
      static_cast<int>(std::find(order.begin(), order.end(), target) - order.begin());

  std::vector<int> keep{target};
  for (int pos = 0; pos < target_pos; ++pos)
    if (order[pos] != adversary) keep.push_back(order[pos]);

  struct Branch {
    double weight;
    WorkingChannel work;
  };
  std::vector<Branch> branches;
  branches.push_back(Branch{1.0, reduce_channel(ch, target, adversary, q, keep, options)});

  for (int pos = 0; pos < target_pos; ++pos) {
    const int sender = order[pos];
    const StageOps& stage = stage_ops.at(pos);
    if (sender == adversary) {
      // The adversary's stage disturbs every branch as the full induced map.
      for (Branch& b : branches) b.work.ch = b.work.ch.post_compose(stage.induced);
      continue;
    }
    // Honest stage: condition on the sent symbol; in the derivation form the
    // matched outcome's Lueders update is applied as well.
    const RVector dist = conditioning_dist_for(options, ch, sender, *stage.povm);
    std::vector<Branch> next;
    for (Branch& b : branches) {
      const int idx = b.work.slot_index.at(sender);
      for (int m = 0; m < dist.size(); ++m) {
        if (dist[m] <= 0.0) continue;
        int element = -1;
        for (int e = 0; e < stage.povm->size(); ++e)
          if (stage.povm->label(e) == m) {
            element = e;
            break;
          }
        if (element < 0)
          throw MissingStagePovm("stage POVM for slot " + std::to_string(sender) +
                                 " has no outcome for symbol " + std::to_string(m));
        WorkingChannel frozen = b.work;
        frozen.ch = frozen.ch.average_slot(idx, InputDistribution::point(idx, dist.size(), m));
        frozen.slot_index.erase(sender);
        for (auto& [orig, i] : frozen.slot_index)
          if (i > idx) --i;
        if (!options.statement_form) {
          auto updated = lueders_update_channel(frozen.ch, stage.povm->element(element),
                                                stage.roots[element]);
          if (!updated) continue;  // impossible branch, weight dropped
          frozen.ch = std::move(*updated);
        }
        next.push_back(Branch{b.weight * dist[m], std::move(frozen)});
      }
    }
    branches = std::move(next);
  }

  double total_weight = 0.0;
  for (const Branch& b : branches) total_weight += b.weight;
  if (total_weight <= 1e-12) return 0.0;

  std::vector<HolevoBranch> hb;
  hb.reserve(branches.size());
  for (Branch& b : branches)
    hb.push_back(HolevoBranch{b.weight / total_weight, b.work.ch.states()});
  return conditional_holevo(p, hb);
}

}  // namespace

RateRegion region_2user(const CqMacChannel& ch, const std::vector<int>& decode_order,
                        const Povm& decoder_povm_stage1, const OptimizerConfig& cfg) {
  if (ch.senders() != 2) throw SlotOutOfRange("region_2user: channel must have 2 senders");
  require_order(ch, decode_order);
  if (decoder_povm_stage1.dim() != ch.out_dim())
    throw DimensionMismatch("region_2user: stage-1 POVM dimension mismatch");

  const int first = decode_order[0];
  const int second = decode_order[1];

  RateRegion region;
  region.decode_order = decode_order;

  const MaxminResult r1 = maxmin_rate(ch, first, second, {}, std::nullopt, cfg);
  region.bounds.push_back(SenderBound{first, r1.rate, r1.p, r1.q, second, r1.diag});

  const MaxminResult r2 =
      maxmin_rate(ch, second, first, {}, induced_channel(decoder_povm_stage1), cfg);
  region.bounds.push_back(SenderBound{second, r2.rate, r2.p, r2.q, first, r2.diag});

  std::sort(region.bounds.begin(), region.bounds.end(),
            [](const SenderBound& a, const SenderBound& b) { return a.sender < b.sender; });
  return region;
}

RateRegion region_kuser(const CqMacChannel& ch, const std::vector<int>& decode_order,
                        const std::vector<Povm>& stage_povms, const OptimizerConfig& cfg,
                        const RegionOptions& options) {
  const int k = ch.senders();
  if (k > 4) throw KTooLarge("region_kuser: k = " + std::to_string(k) + " exceeds 4");
  require_order(ch, decode_order);
  if (static_cast<int>(stage_povms.size()) < k - 1)
    throw MissingStagePovm("region_kuser: need " + std::to_string(k - 1) + " stage POVMs, got " +
                           std::to_string(stage_povms.size()));
  for (const Povm& p : stage_povms)
    if (p.dim() != ch.out_dim()) throw DimensionMismatch("region_kuser: stage POVM dimension");

  const std::vector<StageOps> stage_ops = build_stage_ops(stage_povms);

  RateRegion region;
  region.decode_order = decode_order;

  for (int target = 0; target < k; ++target) {
    SenderBound bound;
    bound.sender = target;
    bound.rate_bits = std::numeric_limits<double>::infinity();
    for (int adversary = 0; adversary < k; ++adversary) {
      if (adversary == target) continue;
      const auto objective = [&](const RVector& p, const RVector& q) {
        return staged_objective(ch, decode_order, stage_ops, target, adversary, p, q, options);
      };
      const MaxminResult r =
          maxmin_optimize(objective, ch.alphabet_size(target), ch.alphabet_size(adversary), cfg);
      if (r.rate < bound.rate_bits) {
        bound.rate_bits = r.rate;
        bound.input_dist = r.p;
        bound.adversary_dist = r.q;
        bound.binding_adversary = adversary;
        bound.diag = r.diag;
      }
    }
    region.bounds.push_back(std::move(bound));
  }
  return region;
}

RateRegion region_3user(const CqMacChannel& ch, const std::vector<int>& decode_order,
                        const std::vector<Povm>& stage_povms, const OptimizerConfig& cfg,
                        const RegionOptions& options) {
  if (ch.senders() != 3) throw SlotOutOfRange("region_3user: channel must have 3 senders");
  return region_kuser(ch, decode_order, stage_povms, cfg, options);
}

CorollaryResult corollary_region(const CqMacChannel& ch, const OptimizerConfig& cfg,
                                 int orth_search_budget, std::uint64_t seed) {
  if (ch.senders() != 2) throw SlotOutOfRange("corollary_region: channel must have 2 senders");

  CorollaryResult result{std::nullopt, "", check_symmetrizable(ch.avc_view(0, 1)), {}};
  Rng rng(seed);
  result.slot2_orthogonal = check_orthogonally_symmetrizable(ch.avc_view(1, 0), orth_search_budget, rng);

  if (result.slot1_symmetrizability.symmetrizable) {
    result.diagnostic =
        "slot 1: the honest-sender view is symmetrizable (LP slack " +
        std::to_string(result.slot1_symmetrizability.slack) + "), hypothesis fails";
    return result;
  }
  if (result.slot2_orthogonal.kind != OrthKind::CertifiedNot) {
    result.diagnostic = result.slot2_orthogonal.kind == OrthKind::Witness
                            ? "slot 2: view is orthogonally symmetrizable (witness found), hypothesis fails"
                            : "slot 2: orthogonal symmetrizability undecided within budget";
    return result;
  }

  RateRegion region;
  region.decode_order = {0, 1};
  const MaxminResult r1 = maxmin_rate(ch, 0, 1, {}, std::nullopt, cfg);
  region.bounds.push_back(SenderBound{0, r1.rate, r1.p, r1.q, 1, r1.diag});
  const MaxminResult r2 = maxmin_rate(ch, 1, 0, {}, std::nullopt, cfg);
  region.bounds.push_back(SenderBound{1, r2.rate, r2.p, r2.q, 0, r2.diag});
  result.region = std::move(region);
  return result;
}

}  // namespace byzmac
