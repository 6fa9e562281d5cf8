#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdiv/core.hpp"
#include "fairdiv/pf.hpp"

namespace fairdiv {

using nlohmann::json;

namespace detail {

inline Rat entry_to_rat(const json& e, const std::string& where) {
  if (e.is_string()) {
    try {
      return Rat::parse(e.get<std::string>());
    } catch (const ParseError& err) {
      throw ParseError(where + ": " + err.what());
    }
  }
  if (e.is_number_integer()) return Rat(static_cast<long>(e.get<long long>()));
  if (e.is_number())
    throw ParseError(where + ": non-integral numbers lose precision; quote them, e.g. \"0.6\"");
  throw ParseError(where + ": expected a string or integer");
}

}  // namespace detail

/// {"valuations": [[row..], ..]} with entries as "p/q" or decimal strings
/// (or plain integers). Rows are normalized to sum 1 on load.
inline Instance instance_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("valuations"))
    throw ParseError("instance: missing \"valuations\"");
  const json& rows = doc["valuations"];
  if (!rows.is_array() || rows.empty()) throw ParseError("valuations: expected a non-empty array");
  RatMat raw;
  raw.reserve(rows.size());
  std::size_t width = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = rows[i];
    const std::string where = "valuations[" + std::to_string(i) + "]";
    if (!row.is_array() || row.empty()) throw ParseError(where + ": expected a non-empty array");
    if (i == 0)
      width = row.size();
    else if (row.size() != width)
      throw ParseError(where + ": ragged row (expected " + std::to_string(width) + " entries)");
    RatRow r;
    r.reserve(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
      r.push_back(detail::entry_to_rat(row[j], where + "[" + std::to_string(j) + "]"));
    raw.push_back(std::move(r));
  }
  return normalize(raw);
}

inline Instance parse_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return instance_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string render_rat(const Rat& r, std::optional<int> decimals) {
  return decimals ? r.str_decimal(*decimals) : r.str();
}

inline json instance_to_json(const Instance& inst, std::optional<int> decimals = std::nullopt) {
  json rows = json::array();
  for (const auto& row : inst.v) {
    json r = json::array();
    for (const auto& e : row) r.push_back(render_rat(e, decimals));
    rows.push_back(std::move(r));
  }
  return json{{"valuations", std::move(rows)}};
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

inline json allocation_to_json(const Allocation& x, std::optional<int> decimals = std::nullopt) {
  json rows = json::array();
  for (const auto& row : x.x) {
    json r = json::array();
    for (const auto& e : row) r.push_back(render_rat(e, decimals));
    rows.push_back(std::move(r));
  }
  return rows;
}

template <typename T>
json vector_to_json(const std::vector<T>& v, std::optional<int> decimals = std::nullopt) {
  json arr = json::array();
  for (const auto& e : v) {
    if constexpr (std::is_same_v<T, Rat>)
      arr.push_back(render_rat(e, decimals));
    else
      arr.push_back(e);
  }
  return arr;
}

inline json equilibrium_report_to_json(const EquilibriumReport& rep) {
  return json{{"ok", rep.ok},
              {"price_sum_gap", rep.price_sum_gap},
              {"budget_gap", rep.budget_gap},
              {"clearing_gap", rep.clearing_gap},
              {"mbb_gap", rep.mbb_gap},
              {"violations", rep.violations}};
}

}  // namespace fairdiv
