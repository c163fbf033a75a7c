#include <fstream>

#include <json.hpp>

#include "byzmac/cq_channel.hpp"

namespace byzmac {

namespace {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& rows, int expect_dim, const std::string& where) {
  if (!rows.is_array() || rows.empty())
    throw ParseError(where + ": matrix must be a nonempty array of rows");
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(rows.at(0).size());
  if (expect_dim > 0 && (nr != expect_dim || nc != expect_dim))
    throw ParseError(where + ": matrix is " + std::to_string(nr) + "x" + std::to_string(nc) +
                     ", expected " + std::to_string(expect_dim));
  CMatrix m(nr, nc);
  for (int r = 0; r < nr; ++r) {
    const json& row = rows.at(r);
    if (static_cast<int>(row.size()) != nc) throw ParseError(where + ": ragged matrix rows");
    for (int c = 0; c < nc; ++c) {
      const json& cell = row.at(c);
      if (!cell.is_array() || cell.size() != 2)
        throw ParseError(where + ": entries must be [re, im] pairs");
      m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return m;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string tuple_str(const std::vector<int>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

}  // namespace

void save_channel(const CqMacChannel& ch, const std::string& path) {
  json doc;
  doc["k"] = ch.senders();
  json alphabets = json::array();
  for (int i = 0; i < ch.senders(); ++i) {
    json symbols = json::array();
    for (int s = 0; s < ch.alphabet_size(i); ++s) symbols.push_back(s);
    alphabets.push_back(std::move(symbols));
  }
  doc["alphabets"] = std::move(alphabets);
  doc["out_dim"] = ch.out_dim();

  json entries = json::array();
  std::vector<int> tuple(ch.senders(), 0);
  bool done = false;
  while (!done) {
    json entry;
    entry["input"] = tuple;
    entry["matrix"] = matrix_to_json(ch.apply(tuple).mat());
    entries.push_back(std::move(entry));
    done = true;
    for (int i = ch.senders() - 1; i >= 0; --i) {
      if (++tuple[i] < ch.alphabet_size(i)) {
        done = false;
        break;
      }
      tuple[i] = 0;
    }
  }
  doc["entries"] = std::move(entries);

  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << doc.dump(1) << "\n";
}

CqMacChannel load_channel(const std::string& path) {
  const json doc = parse_file(path);
  try {
    const int k = doc.at("k").get<int>();
    const json& alphabets = doc.at("alphabets");
    if (k <= 0 || static_cast<int>(alphabets.size()) != k)
      throw ParseError(path + ": \"alphabets\" must list k alphabets");
    std::vector<int> sizes(k);
    long long total = 1;
    for (int i = 0; i < k; ++i) {
      const json& symbols = alphabets.at(i);
      sizes[i] = static_cast<int>(symbols.size());
      if (sizes[i] == 0) throw ParseError(path + ": empty alphabet for slot " + std::to_string(i));
      for (int s = 0; s < sizes[i]; ++s)
        if (symbols.at(s).get<int>() != s)
          throw ParseError(path + ": alphabet " + std::to_string(i) +
                           " must list symbols 0..n-1 in order");
      total *= sizes[i];
    }
    const int out_dim = doc.at("out_dim").get<int>();

    std::vector<long long> strides(k, 1);
    for (int i = k - 2; i >= 0; --i) strides[i] = strides[i + 1] * sizes[i + 1];

    std::vector<std::optional<DensityOperator>> slots(total);
    for (const json& entry : doc.at("entries")) {
      const auto input = entry.at("input").get<std::vector<int>>();
      if (static_cast<int>(input.size()) != k)
        throw ParseError(path + ": input tuple " + tuple_str(input) + " has wrong arity");
      long long idx = 0;
      for (int i = 0; i < k; ++i) {
        if (input[i] < 0 || input[i] >= sizes[i])
          throw ParseError(path + ": input tuple " + tuple_str(input) + " out of alphabet");
        idx += input[i] * strides[i];
      }
      if (slots[idx].has_value())
        throw ParseError(path + ": duplicate entry for input " + tuple_str(input));
      CMatrix m = matrix_from_json(entry.at("matrix"), out_dim, path + " input " + tuple_str(input));
      try {
        slots[idx].emplace(std::move(m));
      } catch (const Error& e) {
        throw InvariantViolation(path + ": entry for input " + tuple_str(input) + ": " + e.what());
      }
    }
    std::vector<DensityOperator> table;
    table.reserve(total);
    for (long long idx = 0; idx < total; ++idx) {
      if (!slots[idx].has_value()) {
        std::vector<int> missing(k);
        long long rem = idx;
        for (int i = k - 1; i >= 0; --i) {
          missing[i] = static_cast<int>(rem % sizes[i]);
          rem /= sizes[i];
        }
        throw ParseError(path + ": table not total, missing input " + tuple_str(missing));
      }
      table.push_back(std::move(*slots[idx]));
    }
    return CqMacChannel(std::move(sizes), std::move(table));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_povm(const Povm& p, const std::string& path) {
  json doc;
  doc["dim"] = p.dim();
  doc["labels"] = p.labels();
  json elements = json::array();
  for (int m = 0; m < p.size(); ++m) elements.push_back(matrix_to_json(p.element(m)));
  doc["elements"] = std::move(elements);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << doc.dump(1) << "\n";
}

Povm load_povm(const std::string& path) {
  const json doc = parse_file(path);
  try {
    const int dim = doc.at("dim").get<int>();
    const json& elements = doc.at("elements");
    if (!elements.is_array() || elements.empty())
      throw ParseError(path + ": \"elements\" must be a nonempty array");
    std::vector<CMatrix> mats;
    for (std::size_t i = 0; i < elements.size(); ++i)
      mats.push_back(matrix_from_json(elements.at(i), dim, path + " element " + std::to_string(i)));
    std::vector<int> labels;
    if (doc.contains("labels"))
      labels = doc.at("labels").get<std::vector<int>>();
    else
      for (std::size_t i = 0; i < mats.size(); ++i) labels.push_back(static_cast<int>(i));
    try {
      return Povm(std::move(mats), std::move(labels));
    } catch (const Error& e) {
      throw InvariantViolation(path + ": " + e.what());
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace byzmac
