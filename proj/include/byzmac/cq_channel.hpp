#pragma once

// Classical-quantum multiple-access channel model: k input alphabets mapping
// to output states, slot averaging, post-composition with a quantum channel,
// lazy n-fold product extension, the built-in two-sender demo fixture, and
// the JSON channel/POVM file format.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "byzmac/states_povm.hpp"

namespace byzmac {

// Probability distribution over one sender's alphabet.
struct InputDistribution {
  int slot = 0;
  RVector probs;

  InputDistribution(int slot_index, RVector p);

  static InputDistribution uniform(int slot_index, int size);
  static InputDistribution point(int slot_index, int size, int symbol);

  int size() const { return static_cast<int>(probs.size()); }
};

// A frozen slot is pinned either to a fixed symbol or to a distribution.
using FrozenSlot = std::variant<int, RVector>;
using FrozenMap = std::map<int, FrozenSlot>;

// Single-sender arbitrarily-varying view: honest symbol x, jammer symbol t.
class AvcView {
 public:
  AvcView(int honest_size, int jammer_size, std::vector<DensityOperator> table);

  int honest_size() const { return honest_size_; }
  int jammer_size() const { return jammer_size_; }
  int out_dim() const { return table_.front().dim(); }

  const DensityOperator& state(int x, int t) const;

  // W(x, p) = sum_t p(t) W(x, t).
  DensityOperator averaged(int x, const RVector& jammer_dist) const;

 private:
  int honest_size_;
  int jammer_size_;
  std::vector<DensityOperator> table_;  // index x * jammer_size + t
};

class CqMacChannel {
 public:
  // Alphabet symbols are 0..size-1 for each sender. The table must hold one
  // state per input tuple, in row-major (slot-0 slowest) order.
  CqMacChannel(std::vector<int> alphabet_sizes, std::vector<DensityOperator> table);

  int senders() const { return static_cast<int>(alphabet_sizes_.size()); }
  int alphabet_size(int slot) const;
  const std::vector<int>& alphabet_sizes() const { return alphabet_sizes_; }
  int out_dim() const { return table_.front().dim(); }

  const DensityOperator& apply(const std::vector<int>& inputs) const;

  // Averages one slot away under dist; the result has k-1 senders.
  CqMacChannel average_slot(int slot, const InputDistribution& dist) const;

  // Applies q to every output state.
  CqMacChannel post_compose(const QuantumChannel& q) const;

  // Two-slot adversarial view; `frozen` must cover every other slot.
  AvcView avc_view(int honest_slot, int jammer_slot, const FrozenMap& frozen = {}) const;

  // Freezes/averages everything except `slot`, leaving a one-sender channel.
  CqMacChannel restrict_to_slot(int slot, const FrozenMap& frozen) const;

  // One-sender accessors (used by the entropic layer).
  std::vector<DensityOperator> states() const { return table_; }

 private:
  void require_slot(int slot) const;
  long long flat_index(const std::vector<int>& inputs) const;

  std::vector<int> alphabet_sizes_;
  std::vector<long long> strides_;
  std::vector<DensityOperator> table_;
};

// Lazy n-letter memoryless extension; states are built on demand and the
// full |X|^n table is never materialized.
class ProductChannelView {
 public:
  ProductChannelView(CqMacChannel base, int copies);

  int senders() const { return base_.senders(); }
  int copies() const { return copies_; }
  int out_dim() const;  // base out_dim ^ n, capped at kDimensionCap
  const CqMacChannel& base() const { return base_; }

  // inputs[i] is sender i's length-n symbol string.
  DensityOperator apply(const std::vector<std::vector<int>>& inputs) const;

 private:
  CqMacChannel base_;
  int copies_;
};

inline ProductChannelView product_extend(const CqMacChannel& ch, int copies) {
  return ProductChannelView(ch, copies);
}

// The built-in two-sender demo channel W((i,j)) = |i,j><i,j| on a 6-dim
// space (A 2-dim, B 3-dim), with its two decoding POVMs.
CqMacChannel example_channel();
std::pair<Povm, Povm> example_povms();  // (stage POVM for sender 1, for sender 2)

// JSON file formats. Channels: {"k","alphabets","out_dim","entries":[{"input",
// "matrix"}]}. POVMs: {"dim","labels","elements"}. Complex entries are
// [re, im] pairs.
void save_channel(const CqMacChannel& ch, const std::string& path);
CqMacChannel load_channel(const std::string& path);
void save_povm(const Povm& p, const std::string& path);
Povm load_povm(const std::string& path);

}  // namespace byzmac
