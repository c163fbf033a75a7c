#include "byzmac/cq_channel.hpp"

#include <cmath>

namespace byzmac {

InputDistribution::InputDistribution(int slot_index, RVector p) : slot(slot_index), probs(std::move(p)) {
  if (probs.size() == 0) throw InvariantViolation("InputDistribution: empty");
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs[i] < 0.0)
      throw InvariantViolation("InputDistribution: negative probability " + std::to_string(probs[i]));
  if (std::abs(probs.sum() - 1.0) > 1e-12)
    throw InvariantViolation("InputDistribution: sums to " + std::to_string(probs.sum()));
}

InputDistribution InputDistribution::uniform(int slot_index, int size) {
  return InputDistribution(slot_index, RVector::Constant(size, 1.0 / size));
}

InputDistribution InputDistribution::point(int slot_index, int size, int symbol) {
  if (symbol < 0 || symbol >= size)
    throw SymbolOutOfAlphabet("point distribution: symbol " + std::to_string(symbol));
  RVector p = RVector::Zero(size);
  p[symbol] = 1.0;
  return InputDistribution(slot_index, std::move(p));
}

AvcView::AvcView(int honest_size, int jammer_size, std::vector<DensityOperator> table)
    : honest_size_(honest_size), jammer_size_(jammer_size), table_(std::move(table)) {
  if (static_cast<int>(table_.size()) != honest_size_ * jammer_size_)
    throw InvariantViolation("AvcView: table size mismatch");
}

const DensityOperator& AvcView::state(int x, int t) const {
  if (x < 0 || x >= honest_size_) throw SymbolOutOfAlphabet("AvcView: honest symbol " + std::to_string(x));
  if (t < 0 || t >= jammer_size_) throw SymbolOutOfAlphabet("AvcView: jammer symbol " + std::to_string(t));
  return table_[static_cast<std::size_t>(x) * jammer_size_ + t];
}

DensityOperator AvcView::averaged(int x, const RVector& jammer_dist) const {
  if (jammer_dist.size() != jammer_size_)
    throw DimensionMismatch("AvcView::averaged: distribution size mismatch");
  CMatrix acc = CMatrix::Zero(out_dim(), out_dim());
  for (int t = 0; t < jammer_size_; ++t) acc += jammer_dist[t] * state(x, t).mat();
  return DensityOperator(std::move(acc));
}

CqMacChannel::CqMacChannel(std::vector<int> alphabet_sizes, std::vector<DensityOperator> table)
    : alphabet_sizes_(std::move(alphabet_sizes)), table_(std::move(table)) {
  if (alphabet_sizes_.empty()) throw InvariantViolation("CqMacChannel: no senders");
  long long total = 1;
  for (int s : alphabet_sizes_) {
    if (s <= 0) throw InvariantViolation("CqMacChannel: empty alphabet");
    total *= s;
  }
  if (static_cast<long long>(table_.size()) != total)
    throw InvariantViolation("CqMacChannel: table not total, " + std::to_string(table_.size()) +
                             " entries for " + std::to_string(total) + " input tuples");
  const int dim = table_.front().dim();
  for (const DensityOperator& rho : table_)
    if (rho.dim() != dim) throw DimensionMismatch("CqMacChannel: mixed output dimensions");
  strides_.assign(alphabet_sizes_.size(), 1);
  for (int i = static_cast<int>(alphabet_sizes_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * alphabet_sizes_[i + 1];
}

void CqMacChannel::require_slot(int slot) const {
  if (slot < 0 || slot >= senders())
    throw SlotOutOfRange("slot " + std::to_string(slot) + " of " + std::to_string(senders()));
}

int CqMacChannel::alphabet_size(int slot) const {
  require_slot(slot);
  return alphabet_sizes_[slot];
}

long long CqMacChannel::flat_index(const std::vector<int>& inputs) const {
  if (inputs.size() != alphabet_sizes_.size())
    throw DimensionMismatch("apply: expected " + std::to_string(alphabet_sizes_.size()) +
                            " inputs, got " + std::to_string(inputs.size()));
  long long idx = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i] < 0 || inputs[i] >= alphabet_sizes_[i])
      throw SymbolOutOfAlphabet("symbol " + std::to_string(inputs[i]) + " for slot " +
                                std::to_string(i) + " (alphabet size " +
                                std::to_string(alphabet_sizes_[i]) + ")");
    idx += inputs[i] * strides_[i];
  }
  return idx;
}

const DensityOperator& CqMacChannel::apply(const std::vector<int>& inputs) const {
  return table_[flat_index(inputs)];
}

CqMacChannel CqMacChannel::average_slot(int slot, const InputDistribution& dist) const {
  require_slot(slot);
  if (dist.size() != alphabet_sizes_[slot])
    throw DimensionMismatch("average_slot: distribution over " + std::to_string(dist.size()) +
                            " symbols, alphabet size " + std::to_string(alphabet_sizes_[slot]));
  if (senders() == 1) throw SlotOutOfRange("average_slot: cannot reduce a one-sender channel");

  std::vector<int> reduced_sizes;
  for (int i = 0; i < senders(); ++i)
    if (i != slot) reduced_sizes.push_back(alphabet_sizes_[i]);

  long long reduced_total = 1;
  for (int s : reduced_sizes) reduced_total *= s;

  std::vector<DensityOperator> reduced;
  reduced.reserve(reduced_total);
  std::vector<int> tuple(reduced_sizes.size(), 0);
  for (long long r = 0; r < reduced_total; ++r) {
    // Decode the reduced tuple, then re-insert each averaged symbol.
    long long rem = r;
    for (int i = static_cast<int>(reduced_sizes.size()) - 1; i >= 0; --i) {
      tuple[i] = static_cast<int>(rem % reduced_sizes[i]);
      rem /= reduced_sizes[i];
    }
    std::vector<int> full(senders());
    for (int i = 0, j = 0; i < senders(); ++i)
      if (i != slot) full[i] = tuple[j++];
    CMatrix acc = CMatrix::Zero(out_dim(), out_dim());
    for (int x = 0; x < alphabet_sizes_[slot]; ++x) {
      if (dist.probs[x] == 0.0) continue;
      full[slot] = x;
      acc += dist.probs[x] * apply(full).mat();
    }
    reduced.emplace_back(std::move(acc));
  }
  return CqMacChannel(std::move(reduced_sizes), std::move(reduced));
}

CqMacChannel CqMacChannel::post_compose(const QuantumChannel& q) const {
  if (q.dim() != out_dim()) throw DimensionMismatch("post_compose: channel dim mismatch");
  std::vector<DensityOperator> mapped;
  mapped.reserve(table_.size());
  for (const DensityOperator& rho : table_) mapped.push_back(q.apply(rho));
  return CqMacChannel(alphabet_sizes_, std::move(mapped));
}

namespace {
InputDistribution frozen_to_dist(int slot, int size, const FrozenSlot& f) {
  if (std::holds_alternative<int>(f))
    return InputDistribution::point(slot, size, std::get<int>(f));
  return InputDistribution(slot, std::get<RVector>(f));
}
}  // namespace

AvcView CqMacChannel::avc_view(int honest_slot, int jammer_slot, const FrozenMap& frozen) const {
  require_slot(honest_slot);
  require_slot(jammer_slot);
  if (honest_slot == jammer_slot) throw SlotOutOfRange("avc_view: honest == jammer");

  // Average frozen slots from the highest index down so indices stay valid.
  CqMacChannel reduced = *this;
  int honest = honest_slot;
  int jammer = jammer_slot;
  for (int slot = senders() - 1; slot >= 0; --slot) {
    if (slot == honest_slot || slot == jammer_slot) continue;
    auto it = frozen.find(slot);
    if (it == frozen.end())
      throw SlotOutOfRange("avc_view: slot " + std::to_string(slot) + " neither frozen nor active");
    reduced = reduced.average_slot(slot, frozen_to_dist(slot, alphabet_sizes_[slot], it->second));
    if (slot < honest) --honest;
    if (slot < jammer) --jammer;
  }

  const int hs = reduced.alphabet_size(honest);
  const int js = reduced.alphabet_size(jammer);
  std::vector<DensityOperator> table;
  table.reserve(static_cast<std::size_t>(hs) * js);
  for (int x = 0; x < hs; ++x)
    for (int t = 0; t < js; ++t) {
      std::vector<int> inputs(2);
      inputs[honest] = x;
      inputs[jammer] = t;
      table.push_back(reduced.apply(inputs));
    }
  return AvcView(hs, js, std::move(table));
}

CqMacChannel CqMacChannel::restrict_to_slot(int slot, const FrozenMap& frozen) const {
  require_slot(slot);
  CqMacChannel reduced = *this;
  int target = slot;
  for (int s = senders() - 1; s >= 0; --s) {
    if (s == slot) continue;
    auto it = frozen.find(s);
    if (it == frozen.end())
      throw SlotOutOfRange("restrict_to_slot: slot " + std::to_string(s) + " not frozen");
    reduced = reduced.average_slot(s, frozen_to_dist(s, alphabet_sizes_[s], it->second));
    if (s < target) --target;
  }
  return reduced;
}

ProductChannelView::ProductChannelView(CqMacChannel base, int copies)
    : base_(std::move(base)), copies_(copies) {
  if (copies_ <= 0) throw InvariantViolation("ProductChannelView: copies must be positive");
  double dim = 1.0;
  for (int i = 0; i < copies_; ++i) {
    dim *= base_.out_dim();
    if (dim > static_cast<double>(kDimensionCap))
      throw DimensionCapExceeded("ProductChannelView: " + std::to_string(base_.out_dim()) + "^" +
                                 std::to_string(copies_) + " exceeds " +
                                 std::to_string(kDimensionCap));
  }
}

int ProductChannelView::out_dim() const {
  long long dim = 1;
  for (int i = 0; i < copies_; ++i) dim *= base_.out_dim();
  return static_cast<int>(dim);
}

DensityOperator ProductChannelView::apply(const std::vector<std::vector<int>>& inputs) const {
  if (static_cast<int>(inputs.size()) != base_.senders())
    throw DimensionMismatch("ProductChannelView::apply: wrong sender count");
  for (const auto& s : inputs)
    if (static_cast<int>(s.size()) != copies_)
      throw LengthMismatch("ProductChannelView::apply: string length " + std::to_string(s.size()) +
                           ", expected " + std::to_string(copies_));
  std::vector<int> letter(base_.senders());
  CMatrix acc;
  for (int pos = 0; pos < copies_; ++pos) {
    for (int i = 0; i < base_.senders(); ++i) letter[i] = inputs[i][pos];
    const CMatrix& state = base_.apply(letter).mat();
    acc = (pos == 0) ? state : tensor(acc, state);
  }
  return DensityOperator(std::move(acc));
}

namespace {
// |i>^A tensor |j>^B as a 6-vector, A-major.
CVector ket_ij(int i, int j) {
  CVector v = CVector::Zero(6);
  v[3 * i + j] = 1.0;
  return v;
}
CMatrix ketbra(const CVector& a, const CVector& b) { return a * b.adjoint(); }
}  // namespace

CqMacChannel example_channel() {
  std::vector<DensityOperator> table;
  table.reserve(6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) table.push_back(DensityOperator::pure(ket_ij(i, j)));
  return CqMacChannel({2, 3}, std::move(table));
}

std::pair<Povm, Povm> example_povms() {
  // Stage POVM for sender 1: measure the A part, leave B untouched.
  CMatrix d1_0 = CMatrix::Zero(6, 6);
  CMatrix d1_1 = CMatrix::Zero(6, 6);
  for (int j = 0; j < 3; ++j) {
    d1_0 += ketbra(ket_ij(0, j), ket_ij(0, j));
    d1_1 += ketbra(ket_ij(1, j), ket_ij(1, j));
  }

  // Stage POVM for sender 2, with the cross terms on the j = 2 sector.
  CMatrix d2_0 = ketbra(ket_ij(0, 0), ket_ij(0, 0)) + ketbra(ket_ij(1, 0), ket_ij(1, 0)) +
                 0.5 * ketbra(ket_ij(0, 2), ket_ij(0, 2)) + 0.5 * ketbra(ket_ij(1, 2), ket_ij(1, 2)) +
                 0.5 * ketbra(ket_ij(0, 2), ket_ij(1, 2)) + 0.5 * ketbra(ket_ij(1, 2), ket_ij(0, 2));
  CMatrix d2_1 = ketbra(ket_ij(0, 1), ket_ij(0, 1)) + ketbra(ket_ij(1, 1), ket_ij(1, 1)) +
                 0.5 * ketbra(ket_ij(0, 2), ket_ij(0, 2)) + 0.5 * ketbra(ket_ij(1, 2), ket_ij(1, 2)) -
                 0.5 * ketbra(ket_ij(0, 2), ket_ij(1, 2)) - 0.5 * ketbra(ket_ij(1, 2), ket_ij(0, 2));

  return {Povm({d1_0, d1_1}), Povm({d2_0, d2_1})};
}

}  // namespace byzmac
