/*
 * Copyright (C) 2026 bpire contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BPIRE_CONFIG_HPP
#define BPIRE_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpire/env_model.hpp"

namespace bpire {

/// Malformed or schema-violating configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Rate, WalkOracle, Elogw, Decay, BerryEsseen, Laplace, Moments, Validate };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::Rate: return "rate";
  case ExperimentKind::WalkOracle: return "walk-oracle";
  case ExperimentKind::Elogw: return "elogw";
  case ExperimentKind::Decay: return "decay";
  case ExperimentKind::BerryEsseen: return "berry-esseen";
  case ExperimentKind::Laplace: return "laplace";
  case ExperimentKind::Moments: return "moments";
  case ExperimentKind::Validate: return "validate";
  }
  return "validate";
}

inline ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::Rate, ExperimentKind::WalkOracle, ExperimentKind::Elogw,
                 ExperimentKind::Decay, ExperimentKind::BerryEsseen, ExperimentKind::Laplace,
                 ExperimentKind::Moments, ExperimentKind::Validate}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw ConfigError("key 'kind': unknown experiment kind '" + std::string(s) + "'");
}

struct GridSpec {
  double min = -1.0;
  double max = 1.0;
  double step = 1.0;

  std::vector<double> values() const {
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(min + static_cast<double>(i) * step);
    }
    return out;
  }

  friend bool operator==(const GridSpec &, const GridSpec &) = default;
};

struct ExperimentConfig {
  EnvironmentModel environment{{EnvAtom{ShiftedPoisson{1.0}}}};
  ExperimentKind kind = ExperimentKind::Validate;
  GridSpec x_grid;
  std::vector<std::size_t> n_list{16, 64, 256};
  std::size_t replicates = 100000;
  std::uint64_t master_seed = 1;
  std::size_t horizon = 30;
  double q = 1.0;
  double r = 2.0;
  double delta = 2.0;
  double p = 2.0;
  std::optional<std::uint64_t> promotion_threshold;
  unsigned threads = 0;
  /// Laplace-transform arguments (laplace experiments only).
  std::vector<double> t_grid{7.38905609893065, 54.598150033144236, 2980.9579870417283};

  friend bool operator==(const ExperimentConfig &, const ExperimentConfig &) = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed,
                           const std::string &where) {
  if (!obj.is_object()) {
    throw ConfigError("key '" + where + "': expected an object");
  }
  for (const auto &item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
    }
  }
}

inline const json &require(const json &obj, const std::string &key, const std::string &where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError("missing key '" + (where.empty() ? "" : where + ".") + key + "'");
  }
  return *it;
}

inline double get_number(const json &v, const std::string &key) {
  if (!v.is_number()) {
    throw ConfigError("key '" + key + "': expected a number");
  }
  return v.get<double>();
}

inline std::uint64_t get_unsigned(const json &v, const std::string &key) {
  if (!v.is_number_unsigned()) {
    throw ConfigError("key '" + key + "': expected an unsigned integer");
  }
  return v.get<std::uint64_t>();
}

inline OffspringLaw parse_offspring(const json &j, const std::string &where) {
  const auto kind = require(j, "kind", where);
  if (kind == "shifted_poisson") {
    reject_unknown(j, {"kind", "lambda"}, where);
    return ShiftedPoisson{get_number(require(j, "lambda", where), where + ".lambda")};
  }
  if (kind == "shifted_geometric") {
    reject_unknown(j, {"kind", "q"}, where);
    return ShiftedGeometric{get_number(require(j, "q", where), where + ".q")};
  }
  throw ConfigError("key '" + where + ".kind': expected shifted_poisson or shifted_geometric");
}

inline ImmigrationLaw parse_immigration(const json &j, const std::string &where) {
  const auto kind = require(j, "kind", where);
  if (kind == "poisson") {
    reject_unknown(j, {"kind", "nu"}, where);
    return PoissonImmigration{get_number(require(j, "nu", where), where + ".nu")};
  }
  if (kind == "geometric") {
    reject_unknown(j, {"kind", "s"}, where);
    return GeometricImmigration{get_number(require(j, "s", where), where + ".s")};
  }
  if (kind == "none") {
    reject_unknown(j, {"kind"}, where);
    return NoImmigration{};
  }
  throw ConfigError("key '" + where + ".kind': expected poisson, geometric or none");
}

inline EnvironmentModel parse_environment(const json &j) {
  reject_unknown(j, {"atoms"}, "environment");
  const auto &atoms = require(j, "atoms", "environment");
  if (!atoms.is_array() || atoms.empty()) {
    throw ConfigError("key 'environment.atoms': expected a nonempty array");
  }
  std::vector<EnvAtom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string where = "environment.atoms[" + std::to_string(i) + "]";
    reject_unknown(atoms[i], {"offspring", "immigration", "prob"}, where);
    EnvAtom atom{parse_offspring(require(atoms[i], "offspring", where), where + ".offspring")};
    if (atoms[i].contains("immigration")) {
      atom.immigration = parse_immigration(atoms[i]["immigration"], where + ".immigration");
    }
    atom.prob = get_number(require(atoms[i], "prob", where), where + ".prob");
    out.push_back(atom);
  }
  return EnvironmentModel(std::move(out));
}

inline json offspring_to_json(const OffspringLaw &law) {
  if (const auto *p = std::get_if<ShiftedPoisson>(&law)) {
    return {{"kind", "shifted_poisson"}, {"lambda", p->lambda}};
  }
  return {{"kind", "shifted_geometric"}, {"q", std::get<ShiftedGeometric>(law).q}};
}

inline json immigration_to_json(const ImmigrationLaw &law) {
  if (const auto *p = std::get_if<PoissonImmigration>(&law)) {
    return {{"kind", "poisson"}, {"nu", p->nu}};
  }
  if (const auto *g = std::get_if<GeometricImmigration>(&law)) {
    return {{"kind", "geometric"}, {"s", g->s}};
  }
  return {{"kind", "none"}};
}

// 1-based line of a byte offset, for parse diagnostics.
inline std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace detail

inline nlohmann::json to_json(const ExperimentConfig &c) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto &a : c.environment.atoms()) {
    atoms.push_back({{"offspring", detail::offspring_to_json(a.offspring)},
                     {"immigration", detail::immigration_to_json(a.immigration)},
                     {"prob", a.prob}});
  }
  nlohmann::json j;
  j["environment"] = {{"atoms", atoms}};
  j["kind"] = std::string(to_string(c.kind));
  j["x_grid"] = {{"min", c.x_grid.min}, {"max", c.x_grid.max}, {"step", c.x_grid.step}};
  j["n_list"] = c.n_list;
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["horizon"] = c.horizon;
  j["q"] = c.q;
  j["r"] = c.r;
  j["delta"] = c.delta;
  j["p"] = c.p;
  j["promotion_threshold"] =
      c.promotion_threshold ? nlohmann::json(*c.promotion_threshold) : nlohmann::json(nullptr);
  j["threads"] = c.threads;
  j["t_grid"] = c.t_grid;
  return j;
}

inline std::string serialize(const ExperimentConfig &c) { return to_json(c).dump(2) + "\n"; }

/// Strict parse: unknown keys are rejected and named; only `environment` and
/// `kind` are required.
inline ExperimentConfig parse_config(const nlohmann::json &j) {
  detail::reject_unknown(j,
                         {"environment", "kind", "x_grid", "n_list", "replicates", "master_seed",
                          "horizon", "q", "r", "delta", "p", "promotion_threshold", "threads",
                          "t_grid"},
                         "");
  ExperimentConfig c;
  c.environment = detail::parse_environment(detail::require(j, "environment", ""));
  const auto &kind = detail::require(j, "kind", "");
  if (!kind.is_string()) {
    throw ConfigError("key 'kind': expected a string");
  }
  c.kind = parse_kind(kind.get<std::string>());

  if (j.contains("x_grid")) {
    const auto &g = j["x_grid"];
    detail::reject_unknown(g, {"min", "max", "step"}, "x_grid");
    c.x_grid.min = detail::get_number(detail::require(g, "min", "x_grid"), "x_grid.min");
    c.x_grid.max = detail::get_number(detail::require(g, "max", "x_grid"), "x_grid.max");
    c.x_grid.step = detail::get_number(detail::require(g, "step", "x_grid"), "x_grid.step");
    if (!(c.x_grid.step > 0.0) || c.x_grid.max < c.x_grid.min) {
      throw ConfigError("key 'x_grid': need step > 0 and max >= min");
    }
  }
  if (j.contains("n_list")) {
    const auto &nl = j["n_list"];
    if (!nl.is_array() || nl.empty()) {
      throw ConfigError("key 'n_list': expected a nonempty array");
    }
    c.n_list.clear();
    for (const auto &v : nl) {
      c.n_list.push_back(detail::get_unsigned(v, "n_list"));
    }
  }
  if (j.contains("replicates")) {
    c.replicates = detail::get_unsigned(j["replicates"], "replicates");
    if (c.replicates == 0) {
      throw ConfigError("key 'replicates': must be at least 1");
    }
  }
  if (j.contains("master_seed")) {
    c.master_seed = detail::get_unsigned(j["master_seed"], "master_seed");
  }
  if (j.contains("horizon")) {
    c.horizon = detail::get_unsigned(j["horizon"], "horizon");
  }
  if (j.contains("q")) c.q = detail::get_number(j["q"], "q");
  if (j.contains("r")) c.r = detail::get_number(j["r"], "r");
  if (j.contains("delta")) c.delta = detail::get_number(j["delta"], "delta");
  if (j.contains("p")) c.p = detail::get_number(j["p"], "p");
  if (j.contains("promotion_threshold") && !j["promotion_threshold"].is_null()) {
    c.promotion_threshold = detail::get_unsigned(j["promotion_threshold"], "promotion_threshold");
  }
  if (j.contains("threads")) {
    c.threads = static_cast<unsigned>(detail::get_unsigned(j["threads"], "threads"));
  }
  if (j.contains("t_grid")) {
    const auto &tg = j["t_grid"];
    if (!tg.is_array()) {
      throw ConfigError("key 't_grid': expected an array");
    }
    c.t_grid.clear();
    for (const auto &v : tg) {
      c.t_grid.push_back(detail::get_number(v, "t_grid"));
    }
  }
  return c;
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(e.what());
  }
}

} // namespace bpire

#endif // BPIRE_CONFIG_HPP
