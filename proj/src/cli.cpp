#include "byzmac/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "byzmac/simulator.hpp"

namespace byzmac {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

RVector parse_dist(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParseError("bad probability '" + item + "' in distribution " + spec);
    }
  }
  if (values.empty()) throw ParseError("empty distribution");
  RVector dist(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dist[static_cast<Eigen::Index>(i)] = values[i];
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist[i] < 0.0) throw ParseError("distribution has a negative entry");
  if (std::abs(dist.sum() - 1.0) > 1e-9) throw ParseError("distribution not normalized");
  return dist;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ParseError("bad integer '" + item + "' in list " + spec);
    }
  }
  if (values.empty()) throw ParseError("empty list");
  return values;
}

CqMacChannel open_channel(const std::string& spec) {
  if (spec == "example") return example_channel();
  return load_channel(spec);
}

int to_slot_index(int one_based, int k, const char* what) {
  if (one_based < 1 || one_based > k)
    throw SlotOutOfRange(std::string(what) + " " + std::to_string(one_based) +
                         " out of range 1.." + std::to_string(k));
  return one_based - 1;
}

// "SLOT=point:SYM" | "SLOT=dist:P1,P2,..." | "SLOT=uniform"
std::pair<int, FrozenSlot> parse_freeze(const std::string& spec, const CqMacChannel& ch) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ParseError("freeze spec '" + spec + "' missing '='");
  int slot;
  try {
    slot = std::stoi(spec.substr(0, eq));
  } catch (const std::exception&) {
    throw ParseError("freeze spec '" + spec + "' has a bad slot");
  }
  const int idx = to_slot_index(slot, ch.senders(), "freeze slot");
  const std::string rhs = spec.substr(eq + 1);
  if (rhs == "uniform")
    return {idx, RVector::Constant(ch.alphabet_size(idx), 1.0 / ch.alphabet_size(idx))};
  if (rhs.rfind("point:", 0) == 0) {
    int sym;
    try {
      sym = std::stoi(rhs.substr(6));
    } catch (const std::exception&) {
      throw ParseError("freeze spec '" + spec + "' has a bad symbol");
    }
    if (sym < 0 || sym >= ch.alphabet_size(idx))
      throw SymbolOutOfAlphabet("freeze symbol " + std::to_string(sym) + " for slot " +
                                std::to_string(slot));
    return {idx, sym};
  }
  if (rhs.rfind("dist:", 0) == 0) {
    RVector d = parse_dist(rhs.substr(5));
    if (d.size() != ch.alphabet_size(idx))
      throw ParseError("freeze distribution size != alphabet size for slot " +
                       std::to_string(slot));
    return {idx, d};
  }
  throw ParseError("freeze spec '" + spec + "': expected point:SYM, dist:..., or uniform");
}

std::vector<int> parse_order(const std::string& spec, int k) {
  const std::vector<int> raw = parse_int_list(spec);
  if (static_cast<int>(raw.size()) != k)
    throw ParseError("decode order must list all " + std::to_string(k) + " senders");
  std::vector<int> order;
  for (int s : raw) order.push_back(to_slot_index(s, k, "decode order entry"));
  return order;
}

// Default stage POVM: square-root measurement on the per-symbol averaged
// outputs of the stage's sender, uniform priors.
Povm pgm_stage_povm(const CqMacChannel& ch, int sender) {
  FrozenMap frozen;
  for (int s = 0; s < ch.senders(); ++s)
    if (s != sender)
      frozen[s] = RVector::Constant(ch.alphabet_size(s), 1.0 / ch.alphabet_size(s));
  const CqMacChannel single = ch.restrict_to_slot(sender, frozen);
  const int m = single.alphabet_size(0);
  return pgm_decoder(single.states(), RVector::Constant(m, 1.0 / m));
}

struct StagePovmSpec {
  std::string source;  // "pgm" | "example" | "povm:PATH"
};

Povm resolve_stage_povm(const StagePovmSpec& spec, const CqMacChannel& ch, int sender) {
  if (spec.source == "pgm") return pgm_stage_povm(ch, sender);
  if (spec.source == "example") {
    auto [d1, d2] = example_povms();
    if (ch.senders() != 2 || ch.out_dim() != 6)
      throw ParseError("'example' POVMs fit only the built-in example channel");
    return sender == 0 ? d1 : d2;
  }
  if (spec.source.rfind("povm:", 0) == 0) return load_povm(spec.source.substr(5));
  throw ParseError("stage POVM source '" + spec.source + "': expected pgm, example, or povm:PATH");
}

json dist_to_json(const RVector& d) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < d.size(); ++i) arr.push_back(d[i]);
  return arr;
}

std::string dist_to_str(const RVector& d) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < d.size(); ++i) s += (i ? ", " : "") + fmt(d[i]);
  return s + ")";
}

// ---------------------------------------------------------------------------
// demo-example

int cmd_demo(const std::string& format, std::uint64_t seed, long long mc_trials,
             std::ostream& out) {
  const std::vector<DemoCaseResult> rows = paper_example_demo();

  // Optional Monte Carlo cross-check columns.
  std::vector<std::optional<double>> mc_err(rows.size());
  if (mc_trials > 0) {
    const CqMacChannel ch = example_channel();
    auto [d1, d2] = example_povms();
    Rng rng(seed);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const DemoCaseResult& row = rows[i];
      RandomCode code1(0, {{0}, {1}}, {{0}}, d1);
      RandomCode code2(1, {{0}, {1}}, {{0}}, d2);
      SimSetup setup{ch, 1, {code1, code2}, row.decode_order, row.adversary_slot, {}};
      if (row.adversary_slot)
        setup.adversary = AdversaryStrategy::fixed(row.worst_symbol.empty() ? std::vector<int>{0}
                                                                            : row.worst_symbol);
      const ErrorReport rep = error_probability(setup, mc_trials, rng);
      double worst = 0.0;
      for (const auto& est : rep.mc)
        if (est) worst = std::max(worst, est->estimate);
      mc_err[i] = worst;
    }
  }

  bool all_passed = true;
  for (const auto& row : rows) all_passed = all_passed && row.passed;

  if (format == "json") {
    json doc;
    doc["cases"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const DemoCaseResult& row = rows[i];
      json c;
      c["case"] = row.name;
      json order = json::array();
      for (int s : row.decode_order) order.push_back(s + 1);
      c["order"] = order;
      c["adversary"] = row.adversary_slot ? json(*row.adversary_slot + 1) : json(nullptr);
      c["worst_symbol"] = row.worst_symbol;
      json errors = json::object();
      for (int s = 0; s < 2; ++s)
        if (row.error[s]) errors[std::to_string(s + 1)] = *row.error[s];
      c["error"] = errors;
      if (!row.final_stage_outcome_dist.empty()) {
        json dist = json::object();
        for (const auto& [label, p] : row.final_stage_outcome_dist)
          dist[std::to_string(label)] = p;
        c["final_stage_outcome_dist"] = dist;
      }
      if (mc_err[i]) c["mc_worst_error"] = *mc_err[i];
      c["passed"] = row.passed;
      doc["cases"].push_back(std::move(c));
    }
    doc["passed"] = all_passed;
    out << doc.dump(1) << "\n";
  } else {
    const auto pad = [](std::string s, std::size_t width) {
      while (s.size() < width) s += ' ';
      return s;
    };
    out << pad("case", 6) << pad("order", 7) << pad("adversary", 11) << pad("worst-input", 13)
        << pad("err(sender1)", 14) << pad("err(sender2)", 14);
    if (mc_trials > 0) out << pad("mc-worst", 10);
    out << "status\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const DemoCaseResult& row = rows[i];
      std::string order = std::to_string(row.decode_order[0] + 1) + ">" +
                          std::to_string(row.decode_order[1] + 1);
      std::string adv = row.adversary_slot ? std::to_string(*row.adversary_slot + 1) : "-";
      std::string worst = "-";
      if (!row.worst_symbol.empty()) {
        worst.clear();
        for (int s : row.worst_symbol) worst += std::to_string(s);
      }
      const auto err_str = [&](int s) {
        return row.error[s] ? fmt(*row.error[s]) : std::string("-");
      };
      out << pad(row.name, 6) << pad(order, 7) << pad(adv, 11) << pad(worst, 13)
          << pad(err_str(0), 14) << pad(err_str(1), 14);
      if (mc_trials > 0) out << pad(mc_err[i] ? fmt(*mc_err[i]) : "-", 10);
      out << (row.passed ? "ok" : "FAIL") << "\n";
    }
    if (!rows.empty() && !rows.back().final_stage_outcome_dist.empty()) {
      out << "case 2c final-stage outcome distribution:";
      for (const auto& [label, p] : rows.back().final_stage_outcome_dist)
        out << " P(" << label << ")=" << fmt(p);
      out << "\n";
    }
  }
  return all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// entropy / holevo

int cmd_entropic(bool full, const std::string& channel_spec, int slot_1b,
                 const std::string& dist_spec, const std::vector<std::string>& freezes,
                 const std::string& format, std::ostream& out) {
  const RVector dist = parse_dist(dist_spec);
  const CqMacChannel ch = open_channel(channel_spec);
  const int slot = to_slot_index(slot_1b, ch.senders(), "slot");
  FrozenMap frozen;
  for (const std::string& f : freezes) frozen.insert(parse_freeze(f, ch));
  for (int s = 0; s < ch.senders(); ++s)
    if (s != slot && frozen.find(s) == frozen.end())
      throw ParseError("slot " + std::to_string(s + 1) + " is not frozen (use --freeze " +
                       std::to_string(s + 1) + "=...)");
  const CqMacChannel single = ch.restrict_to_slot(slot, frozen);
  if (dist.size() != single.alphabet_size(0))
    throw ParseError("distribution has " + std::to_string(dist.size()) + " entries, alphabet has " +
                     std::to_string(single.alphabet_size(0)));
  const InputDistribution p(0, dist);

  const double chi = holevo(p, single);
  if (!full) {
    if (format == "json") {
      json doc;
      doc["holevo_bits"] = chi;
      out << doc.dump(1) << "\n";
    } else {
      out << fmt(chi) << "\n";
    }
    return 0;
  }

  CMatrix avg = CMatrix::Zero(single.out_dim(), single.out_dim());
  const auto states = single.states();
  for (int x = 0; x < single.alphabet_size(0); ++x) avg += dist[x] * states[x].mat();
  const double s_avg = von_neumann_entropy(DensityOperator(avg));
  const double s_cond = conditional_entropy(single, p);
  const double mi = mutual_info(p, single);
  if (format == "json") {
    json doc;
    doc["average_state_entropy_bits"] = s_avg;
    doc["conditional_entropy_bits"] = s_cond;
    doc["holevo_bits"] = chi;
    doc["mutual_info_bits"] = mi;
    out << doc.dump(1) << "\n";
  } else {
    out << "S(avg)   = " << fmt(s_avg) << " bits\n";
    out << "S(V|P)   = " << fmt(s_cond) << " bits\n";
    out << "chi(P;V) = " << fmt(chi) << " bits\n";
    out << "I(P;V)   = " << fmt(mi) << " bits\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// region

int cmd_region(const std::string& channel_spec, const std::string& order_spec,
               const std::vector<std::string>& stage_specs, const OptimizerConfig& cfg,
               bool statement_form, int expect_k, const std::string& format, std::ostream& out) {
  const CqMacChannel ch = open_channel(channel_spec);
  const int k = ch.senders();
  if (expect_k > 0 && expect_k != k)
    throw ParseError("--k " + std::to_string(expect_k) + " but the channel has " +
                     std::to_string(k) + " senders");
  const std::vector<int> order = parse_order(order_spec, k);

  std::vector<Povm> stage_povms;
  for (int pos = 0; pos + 1 < k; ++pos) {
    StagePovmSpec spec{pos < static_cast<int>(stage_specs.size()) ? stage_specs[pos]
                                                                  : std::string("pgm")};
    stage_povms.push_back(resolve_stage_povm(spec, ch, order[pos]));
  }

  RateRegion region;
  if (k == 2) {
    region = region_2user(ch, order, stage_povms.at(0), cfg);
  } else {
    RegionOptions options;
    options.statement_form = statement_form;
    region = region_kuser(ch, order, stage_povms, cfg, options);
  }

  if (format == "json") {
    json doc;
    json order_json = json::array();
    for (int s : region.decode_order) order_json.push_back(s + 1);
    doc["decode_order"] = order_json;
    doc["bounds"] = json::array();
    for (const SenderBound& b : region.bounds) {
      json bound;
      bound["sender"] = b.sender + 1;
      bound["rate_bits"] = b.rate_bits;
      bound["input_dist"] = dist_to_json(b.input_dist);
      bound["adversary_dist"] = dist_to_json(b.adversary_dist);
      bound["binding_adversary"] = b.binding_adversary + 1;
      bound["gap_estimate"] = b.diag.gap_estimate;
      bound["evals"] = b.diag.evals;
      bound["budget_exhausted"] = b.diag.budget_exhausted;
      doc["bounds"].push_back(std::move(bound));
    }
    out << doc.dump(1) << "\n";
  } else {
    out << "decode order:";
    for (int s : region.decode_order) out << " " << (s + 1);
    out << "\n";
    for (const SenderBound& b : region.bounds) {
      out << "R" << (b.sender + 1) << " <= " << fmt(b.rate_bits) << " bits"
          << "   p* = " << dist_to_str(b.input_dist)
          << "   adversary " << (b.binding_adversary + 1) << " q* = "
          << dist_to_str(b.adversary_dist);
      if (b.diag.budget_exhausted) out << "   [budget exhausted]";
      out << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// symcheck

int cmd_symcheck(const std::string& channel_spec, int honest_1b, int jammer_1b,
                 const std::vector<std::string>& freezes, int budget, std::uint64_t seed,
                 const std::string& format, std::ostream& out) {
  const CqMacChannel ch = open_channel(channel_spec);
  const int honest = to_slot_index(honest_1b, ch.senders(), "honest slot");
  const int jammer = to_slot_index(jammer_1b, ch.senders(), "jammer slot");
  FrozenMap frozen;
  for (const std::string& f : freezes) frozen.insert(parse_freeze(f, ch));
  const AvcView view = ch.avc_view(honest, jammer, frozen);

  const SymVerdict sym = check_symmetrizable(view);
  Rng rng(seed);
  const OrthVerdict orth = check_orthogonally_symmetrizable(view, budget, rng);

  const auto tau_json = [](const Eigen::MatrixXd& tau) {
    json rows = json::array();
    for (Eigen::Index x = 0; x < tau.rows(); ++x) {
      json row = json::array();
      for (Eigen::Index t = 0; t < tau.cols(); ++t) row.push_back(tau(x, t));
      rows.push_back(std::move(row));
    }
    return rows;
  };

  if (format == "json") {
    json doc;
    doc["symmetrizable"] = sym.symmetrizable;
    doc["slack"] = sym.slack;
    if (sym.witness) doc["tau"] = tau_json(sym.witness->tau);
    switch (orth.kind) {
      case OrthKind::Witness: doc["orthogonal"] = "witness"; break;
      case OrthKind::CertifiedNot: doc["orthogonal"] = "certified-not"; break;
      case OrthKind::Unknown: doc["orthogonal"] = "unknown"; break;
    }
    if (orth.tau) doc["orthogonal_tau"] = tau_json(*orth.tau);
    if (orth.blocking_pair) {
      doc["blocking_pair"] = json::array({orth.blocking_pair->first, orth.blocking_pair->second});
    }
    out << doc.dump(1) << "\n";
  } else {
    if (sym.symmetrizable) {
      out << "symmetrizable: yes (witness violation " << fmt(sym.slack) << ")\n";
      out << "tau rows (per honest symbol):\n";
      for (Eigen::Index x = 0; x < sym.witness->tau.rows(); ++x) {
        out << "  x=" << x << ":";
        for (Eigen::Index t = 0; t < sym.witness->tau.cols(); ++t)
          out << " " << fmt(sym.witness->tau(x, t));
        out << "\n";
      }
    } else {
      out << "symmetrizable: no (certified LP slack " << fmt(sym.slack) << ")\n";
    }
    switch (orth.kind) {
      case OrthKind::Witness:
        out << "orthogonally symmetrizable: witness found (min pair overlap "
            << fmt(orth.min_pair_overlap) << ")\n";
        break;
      case OrthKind::CertifiedNot:
        out << "orthogonally symmetrizable: certified not (pair "
            << orth.blocking_pair->first << "," << orth.blocking_pair->second
            << " has all-zero cross overlaps)\n";
        break;
      case OrthKind::Unknown:
        out << "orthogonally symmetrizable: unknown within budget\n";
        break;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string channel_spec = "example";
  std::string order_spec;
  std::string adversary_spec = "none";
  std::vector<std::string> stage_specs;
  std::string perms = "identity";
  std::vector<int> message_counts;
  long long trials = 10000;
  int n = 1;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string transcript_path;
  int transcript_count = 10;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const CqMacChannel ch = open_channel(args.channel_spec);
  const int k = ch.senders();
  const std::vector<int> order = parse_order(args.order_spec, k);

  // Adversary spec: none | SLOT:honest | SLOT:fixed:SYMS | SLOT:worst[:BUDGET]
  std::optional<int> adversary_slot;
  AdversaryStrategy strategy;
  std::string strategy_name = "none";
  if (args.adversary_spec != "none") {
    const auto colon = args.adversary_spec.find(':');
    if (colon == std::string::npos)
      throw ParseError("adversary spec must be none or SLOT:STRATEGY");
    adversary_slot = to_slot_index(std::stoi(args.adversary_spec.substr(0, colon)), k,
                                   "adversary slot");
    const std::string rest = args.adversary_spec.substr(colon + 1);
    if (rest == "honest") {
      strategy_name = "honest";
    } else if (rest.rfind("fixed:", 0) == 0) {
      strategy = AdversaryStrategy::fixed(parse_int_list(rest.substr(6)));
      strategy_name = "fixed:";  // semicolons keep the CSV column comma-free
      for (std::size_t i = 0; i < strategy.sequence.size(); ++i)
        strategy_name += (i ? ";" : "") + std::to_string(strategy.sequence[i]);
    } else if (rest.rfind("worst", 0) == 0) {
      int budget = 256;
      if (rest.rfind("worst:", 0) == 0) budget = std::stoi(rest.substr(6));
      strategy = AdversaryStrategy::worst_case(budget);
      strategy_name = "worst";
    } else {
      throw ParseError("adversary strategy '" + rest + "': expected honest, fixed:..., or worst");
    }
  }

  // Message counts default to the alphabet sizes.
  std::vector<int> messages(k);
  for (int i = 0; i < k; ++i) messages[i] = ch.alphabet_size(i);
  if (!args.message_counts.empty()) {
    if (static_cast<int>(args.message_counts.size()) != k)
      throw ParseError("--messages must list one count per sender");
    for (int i = 0; i < k; ++i) {
      messages[i] = args.message_counts[i];
      if (messages[i] < 1 || messages[i] > ch.alphabet_size(i))
        throw ParseError("message count for sender " + std::to_string(i + 1) +
                         " outside 1..alphabet size");
    }
  }

  // Repetition encoding: message m is the symbol m repeated n times.
  std::vector<std::vector<std::vector<int>>> codewords(k);
  for (int i = 0; i < k; ++i)
    for (int m = 0; m < messages[i]; ++m)
      codewords[i].push_back(std::vector<int>(args.n, m));

  std::vector<std::vector<int>> perms;
  if (args.perms == "identity") {
    std::vector<int> id(args.n);
    for (int p = 0; p < args.n; ++p) id[p] = p;
    perms.push_back(std::move(id));
  } else if (args.perms == "cyclic") {
    for (int shift = 0; shift < args.n; ++shift) {
      std::vector<int> perm(args.n);
      for (int p = 0; p < args.n; ++p) perm[p] = (p + shift) % args.n;
      perms.push_back(std::move(perm));
    }
  } else {
    throw ParseError("--perms must be identity or cyclic");
  }

  // Stage POVMs on the n-letter space. The built-in 'example' source only
  // fits n = 1; 'pgm' builds a square-root measurement on the n-letter
  // codeword states with the other senders averaged uniformly per letter.
  const ProductChannelView view(ch, args.n);
  std::vector<RandomCode> codes;
  for (int i = 0; i < k; ++i) {
    std::string source = "pgm";
    for (const std::string& spec : args.stage_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw ParseError("--povm expects SENDER=SOURCE");
      if (to_slot_index(std::stoi(spec.substr(0, eq)), k, "povm sender") == i)
        source = spec.substr(eq + 1);
    }
    Povm povm = [&]() -> Povm {
      if (source == "example") {
        if (args.n != 1) throw ParseError("'example' POVMs fit only n = 1");
        return resolve_stage_povm(StagePovmSpec{"example"}, ch, i);
      }
      if (source.rfind("povm:", 0) == 0) return load_povm(source.substr(5));
      if (source != "pgm") throw ParseError("POVM source '" + source + "'");
      // Ensemble: per-message product states with other slots averaged.
      FrozenMap frozen;
      for (int s = 0; s < k; ++s)
        if (s != i) frozen[s] = RVector::Constant(ch.alphabet_size(s), 1.0 / ch.alphabet_size(s));
      const CqMacChannel single = ch.restrict_to_slot(i, frozen);
      std::vector<DensityOperator> ensemble;
      for (int m = 0; m < messages[i]; ++m) {
        CMatrix acc;
        for (int pos = 0; pos < args.n; ++pos) {
          const CMatrix& letter = single.apply({m}).mat();
          acc = (pos == 0) ? letter : tensor(acc, letter);
        }
        ensemble.emplace_back(std::move(acc));
      }
      return pgm_decoder(ensemble, RVector::Constant(messages[i], 1.0 / messages[i]));
    }();
    codes.emplace_back(i, codewords[i], perms, std::move(povm));
  }

  SimSetup setup{ch, args.n, std::move(codes), order, adversary_slot, strategy};
  if (adversary_slot && strategy_name == "honest")
    setup.adversary = AdversaryStrategy::honest(
        RVector::Constant(messages[*adversary_slot], 1.0 / messages[*adversary_slot]));

  Rng rng(args.seed);
  if (adversary_slot && setup.adversary.kind == AdversaryStrategy::Kind::WorstCaseSearch) {
    const WorstCaseReport worst = worst_case_adversary(setup, rng);
    // Re-run the summary against the overall worst fixed sequence.
    std::vector<int> worst_seq;
    double worst_err = -1.0;
    for (const auto& sw : worst.oblivious)
      if (sw && sw->max_error > worst_err) {
        worst_err = sw->max_error;
        worst_seq = sw->worst_sequence;
      }
    setup.adversary = AdversaryStrategy::fixed(worst_seq);
    strategy_name = "worst";
  }

  const ErrorReport report = error_probability(setup, args.trials, rng);

  if (!args.transcript_path.empty()) {
    std::ofstream tf(args.transcript_path);
    if (!tf) throw ParseError("cannot write " + args.transcript_path);
    Rng trng(args.seed ^ 0x7453cb5391f6aa21ULL);
    for (int e = 0; e < args.transcript_count; ++e)
      tf << transcript_to_jsonl(run_episode(setup, trng)) << "\n";
  }

  std::string order_str;
  for (std::size_t i = 0; i < order.size(); ++i)
    order_str += (i ? ">" : "") + std::to_string(order[i] + 1);

  if (args.format == "json") {
    json doc;
    doc["order"] = order_str;
    doc["adversary_slot"] = adversary_slot ? json(*adversary_slot + 1) : json(nullptr);
    doc["strategy"] = strategy_name;
    doc["trials"] = args.trials;
    doc["seed"] = args.seed;
    doc["senders"] = json::array();
    for (int i = 0; i < k; ++i) {
      if (!report.mc[i]) continue;
      json s;
      s["sender"] = i + 1;
      s["err_mc"] = report.mc[i]->estimate;
      s["ci_low"] = report.mc[i]->ci_low;
      s["ci_high"] = report.mc[i]->ci_high;
      if (report.exact && report.exact->error[i]) s["err_exact"] = *report.exact->error[i];
      doc["senders"].push_back(std::move(s));
    }
    out << doc.dump(1) << "\n";
  } else {
    out << "order,adversary_slot,strategy,sender,err_exact,err_mc,ci_low,ci_high,trials,seed\n";
    for (int i = 0; i < k; ++i) {
      if (!report.mc[i]) continue;
      std::string exact_str;
      if (report.exact && report.exact->error[i]) exact_str = fmt(*report.exact->error[i]);
      out << order_str << "," << (adversary_slot ? std::to_string(*adversary_slot + 1) : "") << ","
          << strategy_name << "," << (i + 1) << "," << exact_str << ","
          << fmt(report.mc[i]->estimate) << "," << fmt(report.mc[i]->ci_low) << ","
          << fmt(report.mc[i]->ci_high) << "," << args.trials << "," << args.seed << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// export-example

int cmd_export(const std::string& dir, std::ostream& out) {
  const CqMacChannel ch = example_channel();
  auto [d1, d2] = example_povms();
  save_channel(ch, dir + "/example.json");
  save_povm(d1, dir + "/d1.json");
  save_povm(d2, dir + "/d2.json");
  out << "wrote " << dir << "/example.json, " << dir << "/d1.json, " << dir << "/d2.json\n";
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Byzantine multiple-access classical-quantum channel toolkit"};
  app.require_subcommand(1);

  // demo-example
  auto* demo = app.add_subcommand("demo-example",
                                  "Run the built-in decoding-order demo (six cases, exact)");
  std::string demo_format = "table";
  std::uint64_t demo_seed = 1;
  long long demo_mc_trials = 0;
  demo->add_option("--format", demo_format, "table|json")->check(CLI::IsMember({"table", "json"}));
  demo->add_option("--seed", demo_seed, "seed for the optional Monte Carlo cross-check");
  demo->add_option("--mc-trials", demo_mc_trials, "Monte Carlo trials per case (0 = exact only)");

  // entropy / holevo
  std::string ent_channel, ent_dist;
  int ent_slot = 1;
  std::vector<std::string> ent_freeze;
  std::string ent_format = "table";
  auto add_entropic_options = [&](CLI::App* cmd) {
    cmd->add_option("--channel", ent_channel, "channel file or 'example'")->required();
    cmd->add_option("--slot", ent_slot, "sender slot (1-based)")->required();
    cmd->add_option("--dist", ent_dist, "input distribution, comma separated")->required();
    cmd->add_option("--freeze", ent_freeze,
                    "freeze other slots: SLOT=point:SYM | SLOT=dist:... | SLOT=uniform");
    cmd->add_option("--format", ent_format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));
  };
  auto* entropy = app.add_subcommand("entropy", "Entropic quantities of a one-slot restriction");
  add_entropic_options(entropy);
  auto* holevo_cmd = app.add_subcommand("holevo", "Holevo quantity of a one-slot restriction");
  add_entropic_options(holevo_cmd);

  // region
  auto* region = app.add_subcommand("region", "Capacity-region bounds under a decode order");
  std::string reg_channel, reg_order;
  std::string reg_stage1 = "pgm", reg_stage2 = "pgm", reg_stage3 = "pgm";
  std::string reg_format = "table";
  bool reg_statement = false;
  int reg_k = 0;
  OptimizerConfig reg_cfg;
  region->add_option("--channel", reg_channel, "channel file or 'example'")->required();
  region->add_option("--order", reg_order, "decode order, e.g. 1,2")->required();
  region->add_option("--k", reg_k, "expected sender count (validation only)");
  region->add_option("--stage1", reg_stage1, "stage-1 POVM: pgm | example | povm:PATH");
  region->add_option("--stage2", reg_stage2, "stage-2 POVM (3+ senders)");
  region->add_option("--stage3", reg_stage3, "stage-3 POVM (4 senders)");
  region->add_option("--grid", reg_cfg.grid_resolution, "initial simplex grid resolution");
  region->add_option("--rounds", reg_cfg.refinement_rounds, "refinement rounds");
  region->add_option("--tol", reg_cfg.tolerance, "refinement tolerance in bits");
  region->add_option("--max-evals", reg_cfg.max_evals, "objective evaluation budget");
  region->add_flag("--statement-form", reg_statement,
                   "drop the honest senders' measurement sandwiches in conditional branches");
  region->add_option("--format", reg_format, "table|json")->check(CLI::IsMember({"table", "json"}));

  // symcheck
  auto* symcheck = app.add_subcommand("symcheck", "Symmetrizability checks of an adversarial view");
  std::string sym_channel;
  int sym_honest = 1, sym_jammer = 2;
  std::vector<std::string> sym_freeze;
  int sym_budget = 2000;
  std::uint64_t sym_seed = 1;
  std::string sym_format = "table";
  symcheck->add_option("--channel", sym_channel, "channel file or 'example'")->required();
  symcheck->add_option("--honest", sym_honest, "honest slot (1-based)")->required();
  symcheck->add_option("--jammer", sym_jammer, "jammer slot (1-based)")->required();
  symcheck->add_option("--freeze", sym_freeze, "freeze remaining slots");
  symcheck->add_option("--budget", sym_budget, "random tau attempts for the orthogonal check");
  symcheck->add_option("--seed", sym_seed, "seed for the random tau search");
  symcheck->add_option("--format", sym_format, "table|json")
      ->check(CLI::IsMember({"table", "json"}));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sequential-decoding episodes");
  SimulateArgs sim;
  simulate->add_option("--channel", sim.channel_spec, "channel file or 'example'");
  simulate->add_option("--order", sim.order_spec, "decode order, e.g. 2,1")->required();
  simulate->add_option("--adversary", sim.adversary_spec,
                       "none | SLOT:honest | SLOT:fixed:SYMS | SLOT:worst[:BUDGET]");
  simulate->add_option("--povm", sim.stage_specs, "per-sender POVM source: SENDER=pgm|example|povm:PATH");
  simulate->add_option("--perms", sim.perms, "permutation family: identity | cyclic");
  std::string sim_messages;
  simulate->add_option("--messages", sim_messages, "messages per sender, comma separated");
  simulate->add_option("--trials", sim.trials, "Monte Carlo trials");
  simulate->add_option("--n", sim.n, "block length");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--format", sim.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--transcripts", sim.transcript_path, "write episode transcripts (JSONL)");
  simulate->add_option("--transcript-count", sim.transcript_count, "episodes to transcribe");

  // export-example
  auto* exporter = app.add_subcommand("export-example", "Write the built-in fixture to JSON files");
  std::string export_dir = ".";
  exporter->add_option("--dir", export_dir, "output directory");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (demo->parsed()) return cmd_demo(demo_format, demo_seed, demo_mc_trials, out);
    if (entropy->parsed())
      return cmd_entropic(true, ent_channel, ent_slot, ent_dist, ent_freeze, ent_format, out);
    if (holevo_cmd->parsed())
      return cmd_entropic(false, ent_channel, ent_slot, ent_dist, ent_freeze, ent_format, out);
    if (region->parsed())
      return cmd_region(reg_channel, reg_order, {reg_stage1, reg_stage2, reg_stage3}, reg_cfg,
                        reg_statement, reg_k, reg_format, out);
    if (symcheck->parsed())
      return cmd_symcheck(sym_channel, sym_honest, sym_jammer, sym_freeze, sym_budget, sym_seed,
                          sym_format, out);
    if (simulate->parsed()) {
      if (!sim_messages.empty()) sim.message_counts = parse_int_list(sim_messages);
      return cmd_simulate(sim, out);
    }
    if (exporter->parsed()) return cmd_export(export_dir, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const SymbolOutOfAlphabet& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const SlotOutOfRange& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace byzmac
