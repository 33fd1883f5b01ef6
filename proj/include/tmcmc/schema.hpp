#pragma once

#include <initializer_list>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tmcmc::schema {

/// Field kinds used by the output schemas.
enum class Kind { number, unsigned_integer, boolean, string, array, object, number_or_inf };

using Problems = std::vector<std::string>;
using Field = std::pair<const char*, Kind>;

namespace detail {

inline bool matches(const nlohmann::json& v, Kind kind) {
  switch (kind) {
    case Kind::number: return v.is_number();
    case Kind::unsigned_integer: return v.is_number_unsigned();
    case Kind::boolean: return v.is_boolean();
    case Kind::string: return v.is_string();
    case Kind::array: return v.is_array();
    case Kind::object: return v.is_object();
    case Kind::number_or_inf: return v.is_number() || (v.is_string() && v.get<std::string>() == "inf");
  }
  return false;
}

inline void require(const nlohmann::json& j, std::initializer_list<Field> fields, const std::string& where,
                    Problems& out) {
  if (!j.is_object()) {
    out.push_back(where + ": expected an object");
    return;
  }
  for (const auto& [name, kind] : fields) {
    if (!j.contains(name)) {
      out.push_back(where + ": missing '" + name + "'");
    } else if (!matches(j.at(name), kind)) {
      out.push_back(where + ": '" + name + "' has the wrong type");
    }
  }
}

inline void require_numbers(const nlohmann::json& arr, const std::string& where, Problems& out) {
  if (!arr.is_array()) return;
  for (const auto& v : arr) {
    if (!v.is_number()) {
      out.push_back(where + ": non-numeric entry");
      return;
    }
  }
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

/// Checks the header prefix and that every data row has the header width and
/// numeric cells from column `first_numeric` on.
inline Problems check_csv(std::istream& in, const std::vector<std::string>& prefix, std::size_t first_numeric,
                          bool exact_header, const std::string& what) {
  Problems out;
  std::string line;
  if (!std::getline(in, line)) return {what + ": empty file"};
  const auto header = split(line);
  if (header.size() < prefix.size() || (exact_header && header.size() != prefix.size())) {
    out.push_back(what + ": header has " + std::to_string(header.size()) + " columns");
    return out;
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (header[i] != prefix[i]) out.push_back(what + ": column " + std::to_string(i) + " is '" + header[i] + "'");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      out.push_back(what + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
      break;
    }
    for (std::size_t i = first_numeric; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
      } catch (const std::exception&) {
        out.push_back(what + ": row " + std::to_string(row) + " column " + header[i] + " is not numeric");
        return out;
      }
    }
  }
  return out;
}

}  // namespace detail

/// `iter,accepted,log_density,x_<i>...`
inline Problems validate_trace_csv(std::istream& in) {
  return detail::check_csv(in, {"iter", "accepted", "log_density"}, 0, false, "trace csv");
}

/// `kernel,k,ell,seed,accept_rate,ess_per_iter,wall_ms`
inline Problems validate_study_csv(std::istream& in) {
  return detail::check_csv(in, {"kernel", "k", "ell", "seed", "accept_rate", "ess_per_iter", "wall_ms"}, 1, true,
                           "study csv");
}

/// `kernel,k,ell,metric,value`
inline Problems validate_study_long_csv(std::istream& in) {
  Problems out;
  std::string line;
  if (!std::getline(in, line) || line != "kernel,k,ell,metric,value") out.push_back("study long csv: bad header");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto cells = detail::split(line);
    if (cells.size() != 5 || (cells[3] != "accept_rate" && cells[3] != "ess_per_iter")) {
      out.push_back("study long csv: malformed row " + std::to_string(row));
      break;
    }
  }
  return out;
}

/// Verdict array as written by db-check and discrete-check.
inline Problems validate_verdicts(const nlohmann::json& j) {
  Problems out;
  if (!j.is_array()) return {"verdicts: expected an array"};
  for (std::size_t i = 0; i < j.size(); ++i) {
    detail::require(j[i],
                    {{"check_name", Kind::string},
                     {"passed", Kind::boolean},
                     {"max_violation", Kind::number_or_inf},
                     {"tolerance", Kind::number},
                     {"seed", Kind::unsigned_integer},
                     {"negative_control", Kind::boolean},
                     {"expected_failure", Kind::boolean},
                     {"details", Kind::object}},
                    "verdicts[" + std::to_string(i) + "]", out);
  }
  return out;
}

inline Problems validate_sample_summary(const nlohmann::json& j) {
  Problems out;
  detail::require(j,
                  {{"command", Kind::string},
                   {"seed", Kind::unsigned_integer},
                   {"config", Kind::object},
                   {"accept_rate", Kind::number},
                   {"ess_per_coordinate", Kind::array},
                   {"wall_ms", Kind::number},
                   {"chain_runs", Kind::array}},
                  "summary", out);
  if (!out.empty()) return out;
  detail::require(j["config"],
                  {{"kernel", Kind::string},
                   {"target", Kind::string},
                   {"dim", Kind::unsigned_integer},
                   {"iters", Kind::unsigned_integer},
                   {"burn_in", Kind::unsigned_integer},
                   {"chains", Kind::unsigned_integer},
                   {"params", Kind::object}},
                  "summary.config", out);
  detail::require_numbers(j["ess_per_coordinate"], "summary.ess_per_coordinate", out);
  for (const auto& c : j["chain_runs"]) {
    detail::require(c,
                    {{"chain", Kind::unsigned_integer},
                     {"seed", Kind::unsigned_integer},
                     {"trace", Kind::string},
                     {"accept_rate", Kind::number},
                     {"ess", Kind::array},
                     {"nonfinite_proposals", Kind::unsigned_integer},
                     {"wall_ms", Kind::number}},
                    "summary.chain_runs[]", out);
  }
  if (j["chain_runs"].size() != j["config"].value("chains", std::size_t{0})) {
    out.push_back("summary: chain_runs size differs from config.chains");
  }
  return out;
}

inline Problems validate_study_summary(const nlohmann::json& j) {
  Problems out;
  detail::require(j,
                  {{"command", Kind::string},
                   {"config", Kind::object},
                   {"partial", Kind::boolean},
                   {"error", Kind::string},
                   {"optimal", Kind::array}},
                  "study summary", out);
  if (!out.empty()) return out;
  for (const auto& r : j["optimal"]) {
    detail::require(r,
                    {{"kernel", Kind::string},
                     {"k", Kind::unsigned_integer},
                     {"ell_star", Kind::number},
                     {"accept_rate", Kind::number},
                     {"accept_se", Kind::number},
                     {"ess_per_iter", Kind::number},
                     {"grid_ell", Kind::number},
                     {"grid_accept_rate", Kind::number}},
                    "study summary.optimal[]", out);
  }
  return out;
}

inline Problems validate_challenger_summary(const nlohmann::json& j) {
  Problems out;
  detail::require(j,
                  {{"command", Kind::string},
                   {"config", Kind::object},
                   {"laplace", Kind::object},
                   {"kernels", Kind::array},
                   {"agreement", Kind::object},
                   {"disagreement", Kind::boolean}},
                  "challenger summary", out);
  if (!out.empty()) return out;
  if (j["kernels"].size() != 2) out.push_back("challenger summary: expected two kernels");
  for (const auto& k : j["kernels"]) {
    detail::require(k,
                    {{"kernel", Kind::string}, {"params", Kind::object}, {"accept_rates", Kind::array},
                     {"wall_ms", Kind::number}},
                    "challenger summary.kernels[]", out);
    if (!k.contains("params") || !k["params"].is_object()) continue;
    for (const char* p : {"beta0", "beta1"}) {
      detail::require(k["params"].value(p, nlohmann::json()),
                      {{"mean", Kind::number}, {"sd", Kind::number}, {"ess", Kind::number}, {"se", Kind::number},
                       {"rhat", Kind::number}},
                      std::string("challenger summary.params.") + p, out);
    }
  }
  detail::require(j["agreement"], {{"z_beta0", Kind::number}, {"z_beta1", Kind::number}, {"threshold", Kind::number}},
                  "challenger summary.agreement", out);
  return out;
}

}  // namespace tmcmc::schema
