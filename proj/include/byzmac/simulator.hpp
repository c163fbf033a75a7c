#pragma once

// Monte Carlo sequential-decoding simulator for Byzantine MAC episodes:
// permutation random codes with common randomness, adversary strategies,
// exact branch-tree error probabilities, the square-root (pretty good)
// measurement constructor, and the built-in six-case decoding-order demo.

#include <map>
#include <optional>
#include <string>

#include "byzmac/capacity.hpp"

namespace byzmac {

inline constexpr int kAbstainLabel = -1;

// Per-sender random code: base codewords, a permutation family (the common
// randomness), and a base decoding POVM on the n-letter output space whose
// labels are the message identifiers.
struct RandomCode {
  int sender = 0;
  std::vector<std::vector<int>> base_codewords;  // message -> length-n string
  std::vector<std::vector<int>> permutations;    // each permutes positions 0..n-1
  Povm base_povm;

  RandomCode(int sender_slot, std::vector<std::vector<int>> codewords,
             std::vector<std::vector<int>> perms, Povm povm);

  int n() const { return static_cast<int>(base_codewords.front().size()); }
  int message_count() const { return static_cast<int>(base_codewords.size()); }
};

struct AdversaryStrategy {
  enum class Kind { Honest, FixedSequence, WorstCaseSearch };
  Kind kind = Kind::Honest;
  RVector message_dist;       // Honest: message distribution
  std::vector<int> sequence;  // FixedSequence: the jamming input string
  int search_budget = 0;      // WorstCaseSearch: random candidates when exhaustive is intractable

  static AdversaryStrategy honest(RVector dist);
  static AdversaryStrategy fixed(std::vector<int> seq);
  static AdversaryStrategy worst_case(int budget);
};

struct SimSetup {
  CqMacChannel base;  // per-letter channel
  int n = 1;
  std::vector<RandomCode> codes;  // one per sender, indexed by slot
  std::vector<int> decode_order;
  std::optional<int> adversary_slot;
  AdversaryStrategy adversary;  // used when adversary_slot is set
};

struct StageRecord {
  int sender = 0;
  int outcome = 0;  // decoded label
  double prob = 0.0;
  std::string posterior_hash;  // fnv1a-64 over the posterior matrix bytes
};

struct EpisodeTranscript {
  std::vector<int> decode_order;
  std::vector<int> messages;  // per sender; -1 when the slot sent a raw sequence
  std::vector<int> gammas;    // per sender, index into its permutation family
  std::optional<int> adversary_slot;
  std::vector<std::vector<int>> channel_inputs;  // per sender, length n
  std::vector<StageRecord> stages;
  std::vector<std::optional<bool>> correct;  // per sender; empty for the adversary
};

// Runs one episode: honest messages and permutation indices are sampled
// uniformly, the stage POVMs are conjugated by each sender's permutation,
// and each stage updates the state by the sampled Lueders branch. A
// zero-probability branch is recorded as a decode failure, not a crash.
EpisodeTranscript run_episode(const SimSetup& setup, Rng& rng);

std::string transcript_to_jsonl(const EpisodeTranscript& t);

struct ErrorEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;  // 95% binomial (normal approximation)
  double ci_high = 0.0;
  long long errors = 0;
  long long trials = 0;
};

struct ExactReport {
  std::vector<std::optional<double>> error;  // per sender; empty for the adversary slot
  long long paths = 0;
  // Marginal outcome distribution of each decode stage, by outcome label.
  std::vector<std::map<int, double>> stage_outcome_dist;
};

// Exact branch-tree evaluation, averaged over messages and common
// randomness; returns nothing when the path count would exceed `max_paths`.
std::optional<ExactReport> exact_error(const SimSetup& setup, long long max_paths = 10000);

struct ErrorReport {
  std::vector<std::optional<ErrorEstimate>> mc;  // per sender
  std::optional<ExactReport> exact;
  std::uint64_t stream = 0;  // per-trial RNG stream id drawn from the caller's rng
};

// Monte Carlo estimate over `trials` episodes plus the exact value when the
// branch tree is tractable. Trials use per-index RNG streams, so the result
// does not depend on the worker count (BYZMAC_THREADS).
ErrorReport error_probability(const SimSetup& setup, long long trials, Rng& rng);

struct SenderWorstCase {
  double max_error = 0.0;
  std::vector<int> worst_sequence;
};

struct WorstCaseReport {
  std::vector<std::optional<SenderWorstCase>> oblivious;  // per honest sender
  // Adversary allowed to pick its sequence per realized common randomness.
  std::vector<std::optional<double>> gamma_aware;
  bool exhaustive = false;  // every adversary sequence enumerated
  bool exact = false;       // errors from branch trees (false => Unverified)
};

WorstCaseReport worst_case_adversary(const SimSetup& setup, Rng& rng);

// Square-root measurement D_m = S^{-1/2} p_m rho_m S^{-1/2} with
// S = sum_m p_m rho_m, pseudo-inverted on its support; the remainder
// I - sum_m D_m becomes an explicit abstain outcome (label -1) so the POVM
// is complete exactly.
Povm pgm_decoder(const std::vector<DensityOperator>& states, const RVector& priors);

struct DemoCaseResult {
  std::string name;  // "1a".."2c"
  std::vector<int> decode_order;
  std::optional<int> adversary_slot;
  std::vector<int> worst_symbol;                  // adversary's worst one-letter input
  std::vector<std::optional<double>> error;       // per sender, exact
  std::map<int, double> final_stage_outcome_dist;  // at the worst symbol
  bool passed = false;
};

// Reproduces the built-in example channel's six decoding-order cases with
// exact probabilities and asserts the documented outcomes.
std::vector<DemoCaseResult> paper_example_demo();

}  // namespace byzmac
