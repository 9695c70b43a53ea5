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

#ifndef BPIRE_RUNNER_HPP
#define BPIRE_RUNNER_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bpire/analytics.hpp"
#include "bpire/config.hpp"
#include "bpire/env_model.hpp"
#include "bpire/mc_verify.hpp"
#include "bpire/trajectory.hpp"

namespace bpire {

inline constexpr const char *kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitMalformedConfig = 1,
  kExitValidation = 2,
  kExitInconclusive = 3,
  kExitIo = 4,
};

/// Failure to create or write an output artifact.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// 17 significant digits, '.' separator, '\n' line endings.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    row_strings(header);
  }

  template <typename... Cells>
  void row(const Cells &...cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> out;
    (out.push_back(cell(cells)), ...);
    if (out.size() != columns_) {
      throw std::logic_error("CSV row width does not match header");
    }
    row_strings(out);
  }

  const std::string &str() const { return text_; }

  void write(const std::filesystem::path &path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw IoError("cannot open " + path.string() + " for writing");
    }
    f << text_;
    if (!f) {
      throw IoError("failed writing " + path.string());
    }
  }

private:
  static std::string cell(double v) { return format_real(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }

  void row_strings(const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      text_ += cells[i];
      text_ += i + 1 < cells.size() ? ',' : '\n';
    }
  }

  std::size_t columns_;
  std::string text_;
};

inline CsvWriter rate_csv(const RateCurve &curve) {
  CsvWriter w({"x", "n", "dhat", "se", "g_pred", "q_pred"});
  for (const auto &r : curve.rows) {
    w.row(r.x, r.n, r.dhat, r.se, r.g_pred, r.q_pred);
  }
  return w;
}

inline CsvWriter decay_csv(const DecaySeries &s) {
  CsvWriter w({"n", "estimate", "se", "qualifies"});
  for (const auto &r : s.rows) {
    w.row(r.n, r.estimate, r.se, r.qualifies);
  }
  return w;
}

inline CsvWriter fit_csv(const DecaySeries &s) {
  CsvWriter w({"slope", "rho_hat", "ci_lo", "ci_hi"});
  w.row(s.slope, s.rho_hat, s.rho_ci_lo, s.rho_ci_hi);
  return w;
}

inline CsvWriter elogw_csv(const ElogwEstimate &e) {
  CsvWriter w({"N", "mean", "se", "last_increment_estimate", "last_increment_se"});
  w.row(e.horizon, e.mean, e.se, e.last_increment_estimate(), e.last_increment_se());
  return w;
}

inline CsvWriter berry_esseen_csv(const BerryEsseenResult &b) {
  CsvWriter w({"n", "sup_dev", "se_max", "c_fit"});
  for (const auto &r : b.rows) {
    w.row(r.n, r.sup_dev, r.se_max, r.c_fit);
  }
  return w;
}

inline CsvWriter laplace_csv(const LaplaceResult &l) {
  CsvWriter w({"t", "phi_hat", "se", "logt_pow_r_times_phi"});
  for (const auto &r : l.rows) {
    w.row(r.t, r.phi_hat, r.se, r.logt_pow_r_times_phi);
  }
  return w;
}

inline CsvWriter moments_csv(const MomentStability &m) {
  CsvWriter w({"n", "r", "estimate", "se"});
  for (const auto &r : m.rows) {
    w.row(r.n, r.r, r.estimate, r.se);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline void print_validation(const ValidationReport &v, std::ostream &out) {
  out << "validation:\n";
  for (const auto &e : v.entries) {
    out << "  [" << (e.passed ? "pass" : "FAIL") << "] " << e.name << ": " << e.detail << "\n";
  }
}

inline void print_hypotheses(const HypothesisReport &h, std::ostream &out) {
  out << "hypotheses:\n";
  for (const auto &e : h.entries) {
    out << "  [" << (e.passed ? "pass" : "flag") << "] " << e.name << " = "
        << format_real(e.value) << " (" << e.detail << ")\n";
  }
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

inline SimulationOptions simulation_options(const ExperimentConfig &c) {
  SimulationOptions o;
  if (c.promotion_threshold) {
    o.promotion_threshold = *c.promotion_threshold;
  }
  o.threads = c.threads;
  return o;
}

namespace detail {

inline void write_manifest(const ExperimentConfig &c, const std::filesystem::path &dir,
                           double wall_seconds, int exit_code) {
  nlohmann::json m;
  m["config"] = to_json(c);
  m["version"] = kVersion;
  m["wall_time_seconds"] = wall_seconds;
  m["exit_code"] = exit_code;
  std::ofstream f(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot write manifest in " + dir.string());
  }
  f << m.dump(2) << "\n";
}

inline int run_experiment(const ExperimentConfig &c, const std::filesystem::path &dir,
                          std::ostream &log) {
  const auto &env = c.environment;
  const auto report = validate(env);
  const auto opts = simulation_options(c);

  if (c.kind == ExperimentKind::Validate) {
    print_validation(report, log);
    if (report.structurally_valid()) {
      print_hypotheses(hypothesis_report(env, c.p, c.delta, std::max(3.0, c.r)), log);
    }
    return report.structurally_valid() ? kExitOk : kExitValidation;
  }
  if (!report.structurally_valid()) {
    print_validation(report, log);
    return kExitValidation;
  }
  const bool needs_sigma = c.kind == ExperimentKind::Rate || c.kind == ExperimentKind::WalkOracle ||
                           c.kind == ExperimentKind::BerryEsseen;
  if (needs_sigma && !report.usable_for_clt()) {
    log << "error: the exact-rate CLT requires sigma > 0 (log m0 non-degenerate); "
           "this environment has all atoms with the same mean\n";
    return kExitValidation;
  }
  if (c.kind == ExperimentKind::Laplace && env.has_immigration()) {
    log << "error: the Laplace spot-check needs an environment without immigration\n";
    return kExitValidation;
  }

  const auto grid = c.x_grid.values();
  switch (c.kind) {
  case ExperimentKind::Rate: {
    const auto curve = clt_rate_experiment(env, grid, c.n_list, c.replicates, c.master_seed,
                                           {c.horizon, 0}, opts);
    for (const auto &w : curve.warnings) {
      log << "warning: " << w << "\n";
    }
    rate_csv(curve).write(dir / "rate.csv");
    log << "E log W (N = " << c.horizon << "): " << format_real(curve.elogw.mean) << " +- "
        << format_real(curve.elogw.se) << "\n";
    return kExitOk;
  }
  case ExperimentKind::WalkOracle: {
    const auto curve =
        walk_oracle_rate(env, grid, c.n_list, c.replicates, c.master_seed, opts);
    for (const auto &w : curve.warnings) {
      log << "warning: " << w << "\n";
    }
    rate_csv(curve).write(dir / "walk_oracle.csv");
    return kExitOk;
  }
  case ExperimentKind::Elogw: {
    const auto e = estimate_elogw(env, c.horizon, c.replicates, c.master_seed, opts);
    elogw_csv(e).write(dir / "elogw.csv");
    return kExitOk;
  }
  case ExperimentKind::Decay: {
    const auto s = increment_decay(env, c.q, c.n_list, c.replicates, c.master_seed, opts);
    decay_csv(s).write(dir / "decay.csv");
    fit_csv(s).write(dir / "fit.csv");
    if (!s.conclusive) {
      log << "inconclusive: fewer than three rows pass the 5-SE gate\n";
      return kExitInconclusive;
    }
    if (!s.rho_exceeds_one()) {
      log << "inconclusive: 99% interval for rho does not exclude 1\n";
      return kExitInconclusive;
    }
    return kExitOk;
  }
  case ExperimentKind::BerryEsseen: {
    const auto b = berry_esseen_sup(env, c.n_list, c.replicates, grid, c.master_seed, opts);
    for (const auto &w : b.warnings) {
      log << "warning: " << w << "\n";
    }
    berry_esseen_csv(b).write(dir / "berry_esseen.csv");
    if (!b.stable()) {
      log << "inconclusive: sup * sqrt(n) varies by a factor " << format_real(b.c_ratio) << "\n";
      return kExitInconclusive;
    }
    return kExitOk;
  }
  case ExperimentKind::Laplace: {
    const auto l = laplace_decay(env, c.t_grid, c.horizon, c.replicates, c.r, c.master_seed, opts);
    laplace_csv(l).write(dir / "laplace.csv");
    if (!l.bounded()) {
      log << "inconclusive: (log t)^r phi(t) ratio " << format_real(l.ratio) << "\n";
      return kExitInconclusive;
    }
    return kExitOk;
  }
  case ExperimentKind::Moments: {
    const auto m = moment_stability(env, c.r, c.n_list, c.replicates, c.master_seed, opts);
    moments_csv(m).write(dir / "moments.csv");
    if (!m.stable) {
      log << "inconclusive: E|log W_n|^r drifts beyond a factor 2\n";
      return kExitInconclusive;
    }
    return kExitOk;
  }
  case ExperimentKind::Validate:
    break;
  }
  return kExitOk;
}

} // namespace detail

/**
 * Runs one configured experiment, writing its CSV(s) and manifest.json into
 * `out_dir`. Returns the process exit code.
 */
inline int run(const ExperimentConfig &config, const std::filesystem::path &out_dir,
               std::ostream &log) {
  const auto start = std::chrono::steady_clock::now();
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      log << "error: cannot create " << out_dir << ": " << ec.message() << "\n";
      return kExitIo;
    }
    int code = kExitOk;
    try {
      code = detail::run_experiment(config, out_dir, log);
    } catch (const DomainError &e) {
      log << "error: " << e.what() << "\n";
      code = kExitValidation;
    } catch (const PreconditionError &e) {
      log << "error: " << e.what() << "\n";
      code = kExitValidation;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail::write_manifest(config, out_dir, wall, code);
    return code;
  } catch (const IoError &e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

/// Loads a config file; throws ConfigError (exit 1) or IoError (exit 4).
inline ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot read config " + path.string());
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

} // namespace bpire

#endif // BPIRE_RUNNER_HPP
