#include "byzmac/simulator.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace byzmac {

namespace {

std::uint64_t fnv1a(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string matrix_hash(const CMatrix& m) {
  const std::uint64_t h =
      fnv1a(reinterpret_cast<const unsigned char*>(m.data()), sizeof(Complex) * m.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// Flat-index remap realizing the position permutation on n tensor factors of
// dimension d: remap[i] is the source index of destination index i for the
// conjugation E = P D P^dagger, E(i,j) = D(remap[i], remap[j]).
std::vector<int> permutation_index_map(const std::vector<int>& perm, int d, int n) {
  std::vector<int> inverse(n);
  for (int j = 0; j < n; ++j) inverse[perm[j]] = j;
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= d;
  std::vector<int> remap(total);
  std::vector<int> digits(n);
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    for (int pos = n - 1; pos >= 0; --pos) {
      digits[pos] = static_cast<int>(rem % d);
      rem /= d;
    }
    // Destination digits b_j = a_{perm[j]}  =>  source digits a_k = b_{inverse[k]}.
    long long src = 0;
    for (int k = 0; k < n; ++k) src = src * d + digits[inverse[k]];
    remap[idx] = static_cast<int>(src);
  }
  return remap;
}

CMatrix conjugate_by_permutation(const CMatrix& m, const std::vector<int>& remap) {
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(remap[i], remap[j]);
  return out;
}

bool is_identity_perm(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i)) return false;
  return true;
}

std::vector<int> permute_codeword(const std::vector<int>& word, const std::vector<int>& perm) {
  std::vector<int> out(word.size());
  for (std::size_t j = 0; j < word.size(); ++j) out[j] = word[perm[j]];
  return out;
}

void validate_setup(const SimSetup& setup) {
  const int k = setup.base.senders();
  if (static_cast<int>(setup.codes.size()) != k)
    throw LengthMismatch("SimSetup: need one code per sender");
  for (int i = 0; i < k; ++i) {
    if (setup.codes[i].sender != i)
      throw SlotOutOfRange("SimSetup: code " + std::to_string(i) + " labeled for sender " +
                           std::to_string(setup.codes[i].sender));
    if (setup.codes[i].n() != setup.n)
      throw LengthMismatch("SimSetup: code length " + std::to_string(setup.codes[i].n()) +
                           " != n = " + std::to_string(setup.n));
  }
  if (static_cast<int>(setup.decode_order.size()) != k)
    throw SlotOutOfRange("SimSetup: decode order must cover every sender");
  std::vector<bool> seen(k, false);
  for (int s : setup.decode_order) {
    if (s < 0 || s >= k || seen[s]) throw SlotOutOfRange("SimSetup: bad decode order");
    seen[s] = true;
  }
  if (setup.adversary_slot) {
    const int a = *setup.adversary_slot;
    if (a < 0 || a >= k) throw SlotOutOfRange("SimSetup: adversary slot " + std::to_string(a));
    if (setup.adversary.kind == AdversaryStrategy::Kind::FixedSequence &&
        static_cast<int>(setup.adversary.sequence.size()) != setup.n)
      throw LengthMismatch("SimSetup: adversary sequence length != n");
    if (setup.adversary.kind == AdversaryStrategy::Kind::Honest &&
        setup.adversary.message_dist.size() != setup.codes[a].message_count())
      throw DimensionMismatch("SimSetup: adversary message distribution size mismatch");
  }
}

// Prepared per-sender measurement operators for every permutation index.
struct EpisodeEngine {
  const SimSetup& setup;
  ProductChannelView view;
  // [sender][gamma][element]; conjugated by the permutation representation.
  std::vector<std::vector<std::vector<CMatrix>>> elems;
  std::vector<std::vector<std::vector<CMatrix>>> roots;
  std::map<std::vector<int>, CMatrix> state_cache;  // flattened inputs -> state

  explicit EpisodeEngine(const SimSetup& s) : setup(s), view(s.base, s.n) {
    validate_setup(s);
    const int k = s.base.senders();
    elems.resize(k);
    roots.resize(k);
    for (int i = 0; i < k; ++i) {
      const RandomCode& code = s.codes[i];
      std::vector<CMatrix> base_roots;
      base_roots.reserve(code.base_povm.size());
      for (int m = 0; m < code.base_povm.size(); ++m)
        base_roots.push_back(mat_sqrt(code.base_povm.element(m)));
      for (const std::vector<int>& perm : code.permutations) {
        if (is_identity_perm(perm)) {
          elems[i].push_back(code.base_povm.elements());
          roots[i].push_back(base_roots);
          continue;
        }
        const std::vector<int> remap = permutation_index_map(perm, s.base.out_dim(), s.n);
        std::vector<CMatrix> e, r;
        for (int m = 0; m < code.base_povm.size(); ++m) {
          e.push_back(conjugate_by_permutation(code.base_povm.element(m), remap));
          r.push_back(conjugate_by_permutation(base_roots[m], remap));
        }
        elems[i].push_back(std::move(e));
        roots[i].push_back(std::move(r));
      }
    }
  }

  const CMatrix& input_state(const std::vector<std::vector<int>>& inputs) {
    std::vector<int> key;
    for (const auto& s : inputs) key.insert(key.end(), s.begin(), s.end());
    auto it = state_cache.find(key);
    if (it != state_cache.end()) return it->second;
    return state_cache.emplace(std::move(key), view.apply(inputs).mat()).first->second;
  }
};

struct StagePlay {
  int element_index;
  int label;
  double prob;
  CMatrix posterior;  // normalized; maximally mixed on a dead branch
};

StagePlay play_stage(const EpisodeEngine& engine, int sender, int gamma, const CMatrix& state,
                     int element_index) {
  const CMatrix& e = engine.elems[sender][gamma][element_index];
  const double prob = std::max(0.0, (e * state).trace().real());
  StagePlay play;
  play.element_index = element_index;
  play.label = engine.setup.codes[sender].base_povm.label(element_index);
  play.prob = prob;
  if (prob <= tol::zero_branch) {
    const Eigen::Index d = state.rows();
    play.posterior = CMatrix::Identity(d, d) / static_cast<double>(d);
  } else {
    const CMatrix& root = engine.roots[sender][gamma][element_index];
    play.posterior = hermitize(root * state * root);
    play.posterior /= play.posterior.trace().real();
  }
  return play;
}

struct EpisodeOutcome {
  std::vector<int> messages;
  std::vector<int> gammas;
  std::vector<std::vector<int>> inputs;
  std::vector<StagePlay> stages;         // in decode order
  std::vector<std::optional<bool>> correct;
};

EpisodeOutcome run_episode_engine(EpisodeEngine& engine, Rng& rng, bool keep_posteriors) {
  const SimSetup& setup = engine.setup;
  const int k = setup.base.senders();

  EpisodeOutcome out;
  out.messages.assign(k, -1);
  out.gammas.assign(k, 0);
  out.inputs.resize(k);
  out.correct.assign(k, std::nullopt);

  for (int i = 0; i < k; ++i) {
    const RandomCode& code = setup.codes[i];
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == i;
    if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::WorstCaseSearch)
      throw Error("run_episode: resolve WorstCaseSearch via worst_case_adversary first");
    if (!is_adversary) {
      out.messages[i] = static_cast<int>(rng.uniform_int(code.message_count()));
    } else if (setup.adversary.kind == AdversaryStrategy::Kind::Honest) {
      out.messages[i] = rng.pick(setup.adversary.message_dist);
    }
    out.gammas[i] = static_cast<int>(rng.uniform_int(code.permutations.size()));
    if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::FixedSequence)
      out.inputs[i] = setup.adversary.sequence;
    else
      out.inputs[i] = permute_codeword(code.base_codewords[out.messages[i]],
                                       code.permutations[out.gammas[i]]);
  }

  CMatrix state = engine.input_state(out.inputs);
  for (int s : setup.decode_order) {
    const auto& elements = engine.elems[s][out.gammas[s]];
    RVector probs(elements.size());
    for (std::size_t m = 0; m < elements.size(); ++m)
      probs[static_cast<Eigen::Index>(m)] = std::max(0.0, (elements[m] * state).trace().real());
    const int idx = rng.pick(probs);
    StagePlay play = play_stage(engine, s, out.gammas[s], state, idx);
    state = play.posterior;
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == s;
    if (!is_adversary) out.correct[s] = (play.label == out.messages[s]) && play.prob > tol::zero_branch;
    if (!keep_posteriors) play.posterior.resize(0, 0);
    out.stages.push_back(std::move(play));
  }
  return out;
}

}  // namespace

RandomCode::RandomCode(int sender_slot, std::vector<std::vector<int>> codewords,
                       std::vector<std::vector<int>> perms, Povm povm)
    : sender(sender_slot),
      base_codewords(std::move(codewords)),
      permutations(std::move(perms)),
      base_povm(std::move(povm)) {
  if (base_codewords.empty()) throw InvariantViolation("RandomCode: no codewords");
  const std::size_t len = base_codewords.front().size();
  if (len == 0) throw LengthMismatch("RandomCode: empty codeword");
  for (const auto& w : base_codewords)
    if (w.size() != len) throw LengthMismatch("RandomCode: mixed codeword lengths");
  if (permutations.empty()) throw InvariantViolation("RandomCode: permutation family is empty");
  for (const auto& perm : permutations) {
    if (perm.size() != len) throw LengthMismatch("RandomCode: permutation length != n");
    std::vector<bool> seen(len, false);
    for (int p : perm) {
      if (p < 0 || p >= static_cast<int>(len) || seen[p])
        throw InvariantViolation("RandomCode: not a permutation");
      seen[p] = true;
    }
  }
  if (base_povm.size() < static_cast<int>(base_codewords.size()))
    throw InvariantViolation("RandomCode: POVM has fewer outcomes than messages");
}

AdversaryStrategy AdversaryStrategy::honest(RVector dist) {
  AdversaryStrategy s;
  s.kind = Kind::Honest;
  s.message_dist = std::move(dist);
  return s;
}

AdversaryStrategy AdversaryStrategy::fixed(std::vector<int> seq) {
  AdversaryStrategy s;
  s.kind = Kind::FixedSequence;
  s.sequence = std::move(seq);
  return s;
}

AdversaryStrategy AdversaryStrategy::worst_case(int budget) {
  AdversaryStrategy s;
  s.kind = Kind::WorstCaseSearch;
  s.search_budget = budget;
  return s;
}

EpisodeTranscript run_episode(const SimSetup& setup, Rng& rng) {
  EpisodeEngine engine(setup);
  EpisodeOutcome out = run_episode_engine(engine, rng, /*keep_posteriors=*/true);

  EpisodeTranscript t;
  t.decode_order = setup.decode_order;
  t.messages = std::move(out.messages);
  t.gammas = std::move(out.gammas);
  t.adversary_slot = setup.adversary_slot;
  t.channel_inputs = std::move(out.inputs);
  t.correct = std::move(out.correct);
  for (std::size_t i = 0; i < out.stages.size(); ++i) {
    const StagePlay& play = out.stages[i];
    t.stages.push_back(StageRecord{setup.decode_order[i], play.label, play.prob,
                                   matrix_hash(play.posterior)});
  }
  return t;
}

std::string transcript_to_jsonl(const EpisodeTranscript& t) {
  nlohmann::json j;
  // Senders are reported 1-based in exported artifacts.
  auto one_based = [](const std::vector<int>& v) {
    std::vector<int> out;
    for (int x : v) out.push_back(x + 1);
    return out;
  };
  j["order"] = one_based(t.decode_order);
  j["messages"] = t.messages;
  j["gammas"] = t.gammas;
  if (t.adversary_slot)
    j["adversary_slot"] = *t.adversary_slot + 1;
  else
    j["adversary_slot"] = nullptr;
  j["inputs"] = t.channel_inputs;
  nlohmann::json stages = nlohmann::json::array();
  for (const StageRecord& s : t.stages) {
    nlohmann::json stage;
    stage["sender"] = s.sender + 1;
    stage["outcome"] = s.outcome;
    stage["prob"] = s.prob;
    stage["posterior_hash"] = s.posterior_hash;
    stages.push_back(std::move(stage));
  }
  j["stages"] = std::move(stages);
  nlohmann::json correct = nlohmann::json::array();
  for (const auto& c : t.correct) {
    if (c.has_value())
      correct.push_back(*c);
    else
      correct.push_back(nullptr);
  }
  j["correct"] = std::move(correct);
  return j.dump();
}

namespace {

struct ExactAccumulator {
  std::vector<double> error;
  std::vector<std::map<int, double>> stage_dist;
  long long paths = 0;
};

constexpr double kPathPrune = 1e-14;

// Enumerates message/gamma assignments and walks the stage-outcome tree.
void exact_walk(EpisodeEngine& engine, const std::optional<std::vector<int>>& fixed_gammas,
                ExactAccumulator& acc) {
  const SimSetup& setup = engine.setup;
  const int k = setup.base.senders();

  std::vector<std::vector<std::pair<int, double>>> message_options(k);
  for (int i = 0; i < k; ++i) {
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == i;
    if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::FixedSequence) {
      message_options[i] = {{-1, 1.0}};
    } else if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::Honest) {
      for (int m = 0; m < setup.adversary.message_dist.size(); ++m)
        if (setup.adversary.message_dist[m] > 0.0)
          message_options[i].push_back({m, setup.adversary.message_dist[m]});
    } else if (is_adversary) {
      throw Error("exact_error: resolve WorstCaseSearch via worst_case_adversary first");
    } else {
      const int count = setup.codes[i].message_count();
      for (int m = 0; m < count; ++m) message_options[i].push_back({m, 1.0 / count});
    }
  }

  std::vector<int> messages(k), gammas(k);
  std::vector<std::vector<int>> inputs(k);

  std::function<void(int, double)> assign_gammas;
  std::function<void(int, double)> assign_messages;

  const auto run_tree = [&](double weight) {
    for (int i = 0; i < k; ++i) {
      const bool fixed_seq = setup.adversary_slot && *setup.adversary_slot == i &&
                             setup.adversary.kind == AdversaryStrategy::Kind::FixedSequence;
      inputs[i] = fixed_seq ? setup.adversary.sequence
                            : permute_codeword(setup.codes[i].base_codewords[messages[i]],
                                               setup.codes[i].permutations[gammas[i]]);
    }
    const CMatrix root_state = engine.input_state(inputs);

    std::function<void(int, const CMatrix&, double)> descend = [&](int pos, const CMatrix& state,
                                                                   double w) {
      if (pos == static_cast<int>(setup.decode_order.size())) {
        ++acc.paths;
        return;
      }
      const int s = setup.decode_order[pos];
      const auto& elements = engine.elems[s][gammas[s]];
      for (std::size_t idx = 0; idx < elements.size(); ++idx) {
        const double prob = std::max(0.0, (elements[idx] * state).trace().real());
        const double w_next = w * prob;
        if (w_next <= kPathPrune) continue;
        const StagePlay play = play_stage(engine, s, gammas[s], state, static_cast<int>(idx));
        acc.stage_dist[pos][play.label] += w_next;
        // Each sender is decoded at exactly one stage, so its error mass is
        // settled here regardless of deeper outcomes.
        const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == s;
        if (!is_adversary && play.label != messages[s]) acc.error[s] += w_next;
        descend(pos + 1, play.posterior, w_next);
      }
    };
    descend(0, root_state, weight);
  };

  assign_gammas = [&](int i, double weight) {
    if (i == k) {
      run_tree(weight);
      return;
    }
    if (fixed_gammas) {
      gammas[i] = (*fixed_gammas)[i];
      assign_gammas(i + 1, weight);
      return;
    }
    const int count = static_cast<int>(setup.codes[i].permutations.size());
    for (int g = 0; g < count; ++g) {
      gammas[i] = g;
      assign_gammas(i + 1, weight / count);
    }
  };

  assign_messages = [&](int i, double weight) {
    if (i == k) {
      assign_gammas(0, weight);
      return;
    }
    for (const auto& [m, w] : message_options[i]) {
      messages[i] = m;
      assign_messages(i + 1, weight * w);
    }
  };

  assign_messages(0, 1.0);
}

long long exact_path_bound(const SimSetup& setup, bool gammas_fixed) {
  long long bound = 1;
  const int k = setup.base.senders();
  for (int i = 0; i < k; ++i) {
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == i;
    if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::FixedSequence)
      ;  // single option
    else if (is_adversary && setup.adversary.kind == AdversaryStrategy::Kind::Honest)
      bound *= setup.adversary.message_dist.size();
    else
      bound *= setup.codes[i].message_count();
    if (!gammas_fixed) bound *= static_cast<long long>(setup.codes[i].permutations.size());
    bound *= setup.codes[i].base_povm.size();
    if (bound > (1LL << 40)) return bound;  // avoid overflow on absurd inputs
  }
  return bound;
}

std::optional<ExactReport> exact_error_impl(const SimSetup& setup,
                                            const std::optional<std::vector<int>>& fixed_gammas,
                                            long long max_paths) {
  if (exact_path_bound(setup, fixed_gammas.has_value()) > max_paths) return std::nullopt;

  EpisodeEngine engine(setup);
  ExactAccumulator acc;
  acc.error.assign(setup.base.senders(), 0.0);
  acc.stage_dist.resize(setup.decode_order.size());
  exact_walk(engine, fixed_gammas, acc);

  ExactReport report;
  report.paths = acc.paths;
  report.stage_outcome_dist = std::move(acc.stage_dist);
  for (int i = 0; i < setup.base.senders(); ++i) {
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == i;
    if (is_adversary)
      report.error.push_back(std::nullopt);
    else
      report.error.push_back(acc.error[i]);
  }
  return report;
}

}  // namespace

std::optional<ExactReport> exact_error(const SimSetup& setup, long long max_paths) {
  return exact_error_impl(setup, std::nullopt, max_paths);
}

ErrorReport error_probability(const SimSetup& setup, long long trials, Rng& rng) {
  if (trials < 1) throw InvariantViolation("error_probability: trials must be >= 1");
  validate_setup(setup);
  const int k = setup.base.senders();

  ErrorReport report;
  report.stream = rng.next();

  int workers = 1;
  if (const char* env = std::getenv("BYZMAC_THREADS")) {
    workers = std::max(1, std::atoi(env));
    workers = std::min<int>(workers, 64);
  }
  workers = static_cast<int>(std::min<long long>(workers, trials));

  std::vector<std::vector<long long>> chunk_errors(workers, std::vector<long long>(k, 0));
  const auto run_chunk = [&](int w) {
    EpisodeEngine engine(setup);
    for (long long t = w; t < trials; t += workers) {
      Rng trial_rng(report.stream, static_cast<std::uint64_t>(t));
      const EpisodeOutcome out = run_episode_engine(engine, trial_rng, /*keep_posteriors=*/false);
      for (int i = 0; i < k; ++i)
        if (out.correct[i].has_value() && !*out.correct[i]) ++chunk_errors[w][i];
    }
  };
  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run_chunk, w);
    for (auto& th : threads) th.join();
  }

  for (int i = 0; i < k; ++i) {
    const bool is_adversary = setup.adversary_slot && *setup.adversary_slot == i;
    if (is_adversary) {
      report.mc.push_back(std::nullopt);
      continue;
    }
    long long errors = 0;
    for (int w = 0; w < workers; ++w) errors += chunk_errors[w][i];
    ErrorEstimate est;
    est.errors = errors;
    est.trials = trials;
    est.estimate = static_cast<double>(errors) / static_cast<double>(trials);
    const double sigma = std::sqrt(std::max(0.0, est.estimate * (1.0 - est.estimate) /
                                                     static_cast<double>(trials)));
    est.ci_low = std::max(0.0, est.estimate - 1.96 * sigma);
    est.ci_high = std::min(1.0, est.estimate + 1.96 * sigma);
    report.mc.push_back(est);
  }

  report.exact = exact_error(setup);
  return report;
}

WorstCaseReport worst_case_adversary(const SimSetup& setup, Rng& rng) {
  validate_setup(setup);
  if (!setup.adversary_slot)
    throw SlotOutOfRange("worst_case_adversary: no adversary slot in the setup");
  const int adv = *setup.adversary_slot;
  const int k = setup.base.senders();
  const int alphabet = setup.base.alphabet_size(adv);

  double seq_count = std::pow(static_cast<double>(alphabet), setup.n);
  const bool exhaustive = seq_count <= 10000.0;

  std::vector<std::vector<int>> candidates;
  if (exhaustive) {
    std::vector<int> seq(setup.n, 0);
    while (true) {
      candidates.push_back(seq);
      int pos = setup.n - 1;
      while (pos >= 0 && ++seq[pos] == alphabet) seq[pos--] = 0;
      if (pos < 0) break;
    }
  } else {
    const int budget = std::max(1, setup.adversary.search_budget);
    for (int b = 0; b < budget; ++b) {
      std::vector<int> seq(setup.n);
      for (int p = 0; p < setup.n; ++p) seq[p] = static_cast<int>(rng.uniform_int(alphabet));
      candidates.push_back(std::move(seq));
    }
  }

  WorstCaseReport report;
  report.exhaustive = exhaustive;
  report.exact = true;
  report.oblivious.assign(k, std::nullopt);
  report.gamma_aware.assign(k, std::nullopt);

  std::vector<std::vector<double>> errors(candidates.size());  // [candidate][sender]
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SimSetup sub = setup;
    sub.adversary = AdversaryStrategy::fixed(candidates[c]);
    errors[c].assign(k, 0.0);
    if (const auto exact = exact_error(sub)) {
      for (int i = 0; i < k; ++i)
        if (exact->error[i].has_value()) errors[c][i] = *exact->error[i];
    } else {
      report.exact = false;
      Rng mc_rng(rng.next());
      const ErrorReport mc = error_probability(sub, 2000, mc_rng);
      for (int i = 0; i < k; ++i)
        if (mc.mc[i].has_value()) errors[c][i] = mc.mc[i]->estimate;
    }
  }

  for (int i = 0; i < k; ++i) {
    if (i == adv) continue;
    SenderWorstCase worst;
    worst.max_error = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (errors[c][i] > worst.max_error + 1e-15) {
        worst.max_error = errors[c][i];
        worst.worst_sequence = candidates[c];
      }
    }
    report.oblivious[i] = std::move(worst);
  }

  // Gamma-aware mode: the adversary sees the realized common randomness and
  // picks its sequence per gamma assignment; feasible only at desk scale.
  if (report.exhaustive && report.exact) {
    long long gamma_combos = 1;
    for (const RandomCode& code : setup.codes)
      gamma_combos *= static_cast<long long>(code.permutations.size());
    const long long per_gamma_bound = exact_path_bound(setup, /*gammas_fixed=*/true);
    if (gamma_combos * static_cast<long long>(candidates.size()) * per_gamma_bound <= 200000) {
      std::vector<double> aware(k, 0.0);
      std::vector<int> gammas(k, 0);
      std::function<void(int)> loop = [&](int i) {
        if (i == k) {
          std::vector<double> best(k, 0.0);
          for (const auto& candidate : candidates) {
            SimSetup sub = setup;
            sub.adversary = AdversaryStrategy::fixed(candidate);
            const auto exact = exact_error_impl(sub, gammas, per_gamma_bound + 1);
            if (!exact) return;
            for (int s = 0; s < k; ++s)
              if (exact->error[s].has_value()) best[s] = std::max(best[s], *exact->error[s]);
          }
          for (int s = 0; s < k; ++s) aware[s] += best[s] / static_cast<double>(gamma_combos);
          return;
        }
        for (int g = 0; g < static_cast<int>(setup.codes[i].permutations.size()); ++g) {
          gammas[i] = g;
          loop(i + 1);
        }
      };
      loop(0);
      for (int i = 0; i < k; ++i)
        if (i != adv) report.gamma_aware[i] = aware[i];
    }
  }
  return report;
}

Povm pgm_decoder(const std::vector<DensityOperator>& states, const RVector& priors) {
  if (states.empty()) throw DegenerateEnsemble("pgm_decoder: empty ensemble");
  if (static_cast<Eigen::Index>(states.size()) != priors.size())
    throw DimensionMismatch("pgm_decoder: prior size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < priors.size(); ++i) {
    if (priors[i] < -1e-12) throw WeightNotNormalized("pgm_decoder: negative prior");
    total += priors[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw WeightNotNormalized("pgm_decoder: priors sum to " + std::to_string(total));

  const int dim = states.front().dim();
  CMatrix s = CMatrix::Zero(dim, dim);
  for (std::size_t m = 0; m < states.size(); ++m) {
    if (states[m].dim() != dim) throw DimensionMismatch("pgm_decoder: mixed state dimensions");
    s += priors[static_cast<Eigen::Index>(m)] * states[m].mat();
  }

  const HermEig eig = herm_eig(hermitize(s));
  if (eig.eigenvalues.maxCoeff() <= tol::support)
    throw DegenerateEnsemble("pgm_decoder: ensemble average is numerically zero");

  RVector inv_root = RVector::Zero(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues[i] > tol::support) inv_root[i] = 1.0 / std::sqrt(eig.eigenvalues[i]);
  const CMatrix s_inv_root = eig.eigenvectors * inv_root.asDiagonal() * eig.eigenvectors.adjoint();

  std::vector<CMatrix> elements;
  std::vector<int> labels;
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (std::size_t m = 0; m < states.size(); ++m) {
    CMatrix d = hermitize(s_inv_root * (priors[static_cast<Eigen::Index>(m)] * states[m].mat()) *
                          s_inv_root);
    sum += d;
    elements.push_back(std::move(d));
    labels.push_back(static_cast<int>(m));
  }
  // Explicit abstain outcome carrying I - sum so completeness is exact.
  CMatrix abstain = hermitize(identity(dim) - sum);
  elements.push_back(std::move(abstain));
  labels.push_back(kAbstainLabel);
  return Povm(std::move(elements), std::move(labels));
}

std::vector<DemoCaseResult> paper_example_demo() {
  const CqMacChannel ch = example_channel();
  const auto [d1, d2] = example_povms();

  const auto make_setup = [&](const std::vector<int>& order,
                              std::optional<int> adversary) -> SimSetup {
    // Message m is sent as symbol m; two messages per sender.
    RandomCode code1(0, {{0}, {1}}, {{0}}, d1);
    RandomCode code2(1, {{0}, {1}}, {{0}}, d2);
    SimSetup setup{ch, 1, {code1, code2}, order, adversary, {}};
    if (adversary) setup.adversary = AdversaryStrategy::worst_case(0);
    return setup;
  };

  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

  std::vector<DemoCaseResult> rows;
  Rng rng(0);

  const auto run_case = [&](const std::string& name, const std::vector<int>& order,
                            std::optional<int> adversary,
                            const std::vector<std::pair<int, double>>& expected_errors,
                            std::optional<std::pair<int, double>> expect_worst_symbol_error) {
    DemoCaseResult row;
    row.name = name;
    row.decode_order = order;
    row.adversary_slot = adversary;
    row.error.assign(2, std::nullopt);
    row.passed = true;

    SimSetup setup = make_setup(order, adversary);
    if (adversary) {
      const WorstCaseReport worst = worst_case_adversary(setup, rng);
      row.passed = row.passed && worst.exhaustive && worst.exact;
      for (const auto& [sender, expected] : expected_errors) {
        const auto& sw = worst.oblivious[sender];
        row.passed = row.passed && sw.has_value() && close(sw->max_error, expected);
        if (sw.has_value()) {
          row.error[sender] = sw->max_error;
          if (row.worst_symbol.empty()) row.worst_symbol = sw->worst_sequence;
        }
      }
      if (expect_worst_symbol_error) {
        const auto& sw = worst.oblivious[expect_worst_symbol_error->first];
        row.passed = row.passed && sw.has_value() &&
                     close(sw->max_error, expect_worst_symbol_error->second);
        if (sw.has_value()) row.worst_symbol = sw->worst_sequence;
        // Outcome distribution of the final stage at the worst input.
        SimSetup sub = setup;
        sub.adversary = AdversaryStrategy::fixed(sw.has_value() ? sw->worst_sequence
                                                                : std::vector<int>{0});
        if (const auto exact = exact_error(sub)) {
          row.final_stage_outcome_dist = exact->stage_outcome_dist.back();
        } else {
          row.passed = false;
        }
      }
    } else {
      const auto exact = exact_error(setup);
      row.passed = row.passed && exact.has_value();
      if (exact) {
        for (const auto& [sender, expected] : expected_errors) {
          row.passed = row.passed && exact->error[sender].has_value() &&
                       close(*exact->error[sender], expected);
          row.error[sender] = exact->error[sender];
        }
      }
    }
    rows.push_back(std::move(row));
  };

  // Decode order 1 -> 2.
  run_case("1a", {0, 1}, 1, {{0, 0.0}}, std::nullopt);
  run_case("1b", {0, 1}, std::nullopt, {{0, 0.0}, {1, 0.0}}, std::nullopt);
  run_case("1c", {0, 1}, 0, {{1, 0.0}}, std::nullopt);
  // Decode order 2 -> 1.
  run_case("2a", {1, 0}, 0, {{1, 0.0}}, std::nullopt);
  run_case("2b", {1, 0}, std::nullopt, {{0, 0.0}, {1, 0.0}}, std::nullopt);
  run_case("2c", {1, 0}, 1, {{0, 0.5}}, std::make_pair(0, 0.5));

  // Case 2c extras: the worst input is symbol 2 and the final-stage outcome
  // distribution is exactly (1/2, 1/2).
  DemoCaseResult& case2c = rows.back();
  if (case2c.worst_symbol != std::vector<int>{2}) case2c.passed = false;
  for (int label : {0, 1}) {
    auto it = case2c.final_stage_outcome_dist.find(label);
    if (it == case2c.final_stage_outcome_dist.end() || !close(it->second, 0.5))
      case2c.passed = false;
  }
  return rows;
}

}  // namespace byzmac
