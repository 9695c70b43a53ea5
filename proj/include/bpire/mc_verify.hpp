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

#ifndef BPIRE_MC_VERIFY_HPP
#define BPIRE_MC_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "bpire/analytics.hpp"
#include "bpire/env_model.hpp"
#include "bpire/trajectory.hpp"

namespace bpire {

/// Stream ids at and above this belong to the E log W estimator inside the
/// rate experiment, disjoint from the main batch's [0, R).
inline constexpr std::uint64_t kElogwStreamOffset = std::uint64_t{1} << 62;

// ---------------------------------------------------------------------------
// Empirical CDF
// ---------------------------------------------------------------------------

struct EmpiricalCdf {
  std::vector<double> grid;
  std::vector<double> values;
  std::size_t replicates = 0;
  /// z_{.995} sqrt(F(1 - F) / R): binomial 99% half-widths.
  std::vector<double> ci_halfwidth;
};

/// F(x) = #{samples <= x} / R on a sorted grid, one sort plus a merge.
inline EmpiricalCdf empirical_cdf(std::span<const double> samples, std::span<const double> grid) {
  if (samples.empty()) {
    throw PreconditionError("empirical CDF needs at least one sample");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw PreconditionError("empirical CDF grid must be sorted");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  EmpiricalCdf out;
  out.grid.assign(grid.begin(), grid.end());
  out.replicates = sorted.size();
  out.values.reserve(grid.size());
  out.ci_halfwidth.reserve(grid.size());
  const auto r = static_cast<double>(sorted.size());
  std::size_t below = 0;
  for (const double x : grid) {
    while (below < sorted.size() && sorted[below] <= x) {
      ++below;
    }
    const double f = static_cast<double>(below) / r;
    out.values.push_back(f);
    out.ci_halfwidth.push_back(kZ995 * std::sqrt(f * (1.0 - f) / r));
  }
  return out;
}

/// U_n = (log Z_n - n mu) / (sqrt(n) sigma) with the analytic constants.
inline std::vector<double> standardize(std::span<const double> log_z, std::size_t n,
                                       const MomentSummary &m) {
  require_sigma(m);
  const auto nd = static_cast<double>(n);
  const double scale = std::sqrt(nd) * m.sigma();
  std::vector<double> u(log_z.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = (log_z[i] - nd * m.mu) / scale;
  }
  return u;
}

inline double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (const double x : v) {
    acc += x;
  }
  return acc / static_cast<double>(v.size());
}

/// Standard error of the sample mean (n - 1 denominator).
inline double standard_error(std::span<const double> v, double mean) {
  if (v.size() < 2) {
    return 0.0;
  }
  double ss = 0.0;
  for (const double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// ---------------------------------------------------------------------------
// Rate curves
// ---------------------------------------------------------------------------

struct RateRow {
  double x;
  std::size_t n;
  /// sqrt(n) (F_n(x) - Phi(x)).
  double dhat;
  /// sqrt(n) times the binomial standard error of F_n(x).
  double se;
  double g_pred;
  double q_pred;
  /// Standard error carried by g_pred through the E log W estimate.
  double g_se = 0.0;

  double combined_se() const { return std::sqrt(se * se + g_se * g_se); }
};

struct DecayRow {
  std::size_t n;
  double estimate;
  double se;
  bool qualifies;
};

struct ElogwEstimate {
  std::size_t horizon = 0;
  double mean = 0.0;
  double se = 0.0;
  /// E|log W_{k+1} - log W_k| for the last few k up to the horizon.
  std::vector<DecayRow> tail;

  double last_increment_estimate() const { return tail.empty() ? 0.0 : tail.back().estimate; }
  double last_increment_se() const { return tail.empty() ? 0.0 : tail.back().se; }
};

struct RateCurve {
  std::vector<RateRow> rows;
  std::vector<std::string> warnings;
  ElogwEstimate elogw;

  const RateRow &at(double x, std::size_t n) const {
    for (const auto &r : rows) {
      if (r.n == n && std::abs(r.x - x) < 1e-12) {
        return r;
      }
    }
    throw std::out_of_range("no rate row at the requested (x, n)");
  }
};

namespace detail {

inline void check_ascending(const std::vector<std::size_t> &n_list) {
  if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
    throw PreconditionError("n_list must be nonempty and strictly ascending");
  }
  if (n_list.front() == 0) {
    throw PreconditionError("rate experiments need n >= 1");
  }
}

inline void require_clt_env(const EnvironmentModel &env) {
  const auto report = validate(env);
  if (!report.structurally_valid()) {
    require_valid(env);
  }
  if (!report.usable_for_clt()) {
    throw DomainError("sigma must be positive: the CLT for log Z_n needs atoms with distinct means");
  }
}

/// Rows for one n from standardized samples; prediction g(x) = -phi E log W / sigma + Q.
inline void append_rate_rows(RateCurve &curve, std::span<const double> standardized,
                             std::span<const double> x_grid, std::size_t n,
                             const MomentSummary &m, double e_log_w, double e_log_w_se) {
  const auto cdf = empirical_cdf(standardized, x_grid);
  const double rn = std::sqrt(static_cast<double>(n));
  const auto r = static_cast<double>(cdf.replicates);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    const double f = cdf.values[i];
    RateRow row{};
    row.x = x;
    row.n = n;
    row.dhat = rn * (f - std_normal_cdf(x));
    row.se = rn * std::sqrt(f * (1.0 - f) / r);
    row.q_pred = edgeworth_q(x, m);
    row.g_pred = limit_curve(x, m, e_log_w);
    row.g_se = std_normal_pdf(x) * e_log_w_se / m.sigma();
    curve.rows.push_back(row);
  }
}

inline std::vector<double> sorted_grid(std::vector<double> grid) {
  std::sort(grid.begin(), grid.end());
  return grid;
}

} // namespace detail

/// Rate rows from already standardized samples, one sample set per n.
inline RateCurve rate_curve_from_samples(const std::vector<std::vector<double>> &standardized,
                                         const std::vector<std::size_t> &n_list,
                                         std::vector<double> x_grid, const MomentSummary &m,
                                         double e_log_w, double e_log_w_se = 0.0) {
  x_grid = detail::sorted_grid(std::move(x_grid));
  RateCurve curve;
  for (std::size_t c = 0; c < n_list.size(); ++c) {
    detail::append_rate_rows(curve, standardized.at(c), x_grid, n_list[c], m, e_log_w, e_log_w_se);
  }
  return curve;
}

/**
 * E log W estimated by the mean of log W_N over R replicates, plus the
 * increment diagnostics E|log W_{k+1} - log W_k| for k = N-2..N so callers
 * can see that truncating at N is negligible.
 */
inline ElogwEstimate estimate_elogw(const EnvironmentModel &env, std::size_t horizon,
                                    std::size_t replicates, std::uint64_t master_seed,
                                    const SimulationOptions &opts = {}) {
  ElogwEstimate out;
  out.horizon = horizon;
  if (horizon == 0) {
    return out;
  }
  const std::size_t first = horizon >= 2 ? horizon - 2 : 0;
  std::vector<std::size_t> record;
  for (std::size_t k = first; k <= horizon + 1; ++k) {
    record.push_back(k);
  }
  const auto batch = simulate_batch(env, horizon + 1, replicates, master_seed, record, opts);
  const auto &at_n = batch.at(horizon).logW;
  out.mean = mean_of(at_n);
  out.se = standard_error(at_n, out.mean);

  std::vector<double> inc(replicates);
  for (std::size_t k = first; k <= horizon; ++k) {
    const auto &a = batch.at(k).logW;
    const auto &b = batch.at(k + 1).logW;
    for (std::size_t i = 0; i < replicates; ++i) {
      inc[i] = std::abs(b[i] - a[i]);
    }
    const double est = mean_of(inc);
    const double se = standard_error(inc, est);
    out.tail.push_back({k, est, se, est > 5.0 * se});
  }
  return out;
}

struct ElogwConfig {
  std::size_t horizon = 30;
  /// 0 means "same as the rate experiment".
  std::size_t replicates = 0;
};

/**
 * sqrt(n)(F_n(x) - Phi(x)) for U_n = (log Z_n - n mu)/(sqrt(n) sigma) against
 * the predicted limit g(x). E log W comes from estimate_elogw on a disjoint
 * stream range of the same seed.
 */
inline RateCurve clt_rate_experiment(const EnvironmentModel &env, std::vector<double> x_grid,
                                     const std::vector<std::size_t> &n_list,
                                     std::size_t replicates, std::uint64_t master_seed,
                                     const ElogwConfig &elogw_cfg = {},
                                     const SimulationOptions &opts = {}) {
  detail::require_clt_env(env);
  detail::check_ascending(n_list);
  x_grid = detail::sorted_grid(std::move(x_grid));
  const auto m = log_mean_moments(env);

  RateCurve curve;
  if (replicates < 10000) {
    curve.warnings.push_back("replicates below 1e4: confidence intervals are too wide for the "
                             "exact-rate comparison");
  }

  SimulationOptions elogw_opts = opts;
  elogw_opts.stream_offset = kElogwStreamOffset;
  elogw_opts.couple_no_immigration = false;
  curve.elogw = estimate_elogw(env, elogw_cfg.horizon,
                               elogw_cfg.replicates == 0 ? replicates : elogw_cfg.replicates,
                               master_seed, elogw_opts);

  SimulationOptions main_opts = opts;
  main_opts.couple_no_immigration = false;
  const auto batch =
      simulate_batch(env, n_list.back(), replicates, master_seed, n_list, main_opts);
  for (const std::size_t n : n_list) {
    const auto u = standardize(batch.at(n).logZ, n, m);
    detail::append_rate_rows(curve, u, x_grid, n, m, curve.elogw.mean, curve.elogw.se);
  }
  return curve;
}

/**
 * Control experiment on the environment walk S_n alone (no branching): the
 * predicted limit is Q(x), i.e. g with E log W = 0. S_n is drawn from the
 * same atom substreams as the branching batch for equal seeds.
 */
inline RateCurve walk_oracle_rate(const EnvironmentModel &env, std::vector<double> x_grid,
                                  const std::vector<std::size_t> &n_list, std::size_t replicates,
                                  std::uint64_t master_seed, const SimulationOptions &opts = {}) {
  detail::require_clt_env(env);
  detail::check_ascending(n_list);
  x_grid = detail::sorted_grid(std::move(x_grid));
  const auto m = log_mean_moments(env);

  RateCurve curve;
  if (replicates < 10000) {
    curve.warnings.push_back("replicates below 1e4: confidence intervals are too wide");
  }
  const auto walks = simulate_walk_batch(env, n_list.back(), replicates, master_seed, n_list, opts);
  for (std::size_t c = 0; c < n_list.size(); ++c) {
    const auto u = standardize(walks[c], n_list[c], m);
    detail::append_rate_rows(curve, u, x_grid, n_list[c], m, 0.0, 0.0);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Increment decay
// ---------------------------------------------------------------------------

struct DecaySeries {
  std::vector<DecayRow> rows;
  double q = 1.0;
  /// False when fewer than three rows pass the 5-SE gate; the fit fields are NaN then.
  bool conclusive = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  /// exp(-slope) and its 99% interval from the slope's t interval.
  double rho_hat = std::numeric_limits<double>::quiet_NaN();
  double rho_ci_lo = std::numeric_limits<double>::quiet_NaN();
  double rho_ci_hi = std::numeric_limits<double>::quiet_NaN();

  bool rho_exceeds_one() const { return conclusive && rho_ci_lo > 1.0; }
};

namespace detail {

/// OLS of log(estimate) on n over qualifying rows, slope CI from residuals.
inline void fit_decay(DecaySeries &series) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto &r : series.rows) {
    if (r.qualifies) {
      xs.push_back(static_cast<double>(r.n));
      ys.push_back(std::log(r.estimate));
    }
  }
  if (xs.size() < 3) {
    series.conclusive = false;
    return;
  }
  const auto k = static_cast<double>(xs.size());
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  series.slope = sxy / sxx;
  series.intercept = my - series.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - series.intercept - series.slope * xs[i];
    rss += e * e;
  }
  series.slope_se = std::sqrt(rss / (k - 2.0) / sxx);
  const boost::math::students_t dist(k - 2.0);
  const double t = boost::math::quantile(dist, 0.995);
  series.rho_hat = std::exp(-series.slope);
  series.rho_ci_lo = std::exp(-(series.slope + t * series.slope_se));
  series.rho_ci_hi = std::exp(-(series.slope - t * series.slope_se));
  series.conclusive = true;
}

} // namespace detail

/**
 * E|log W_{n+1} - log W_n|^q per n, then a log-linear fit over rows whose
 * estimate exceeds five standard errors; rho_hat = exp(-slope).
 */
inline DecaySeries increment_decay(const EnvironmentModel &env, double q,
                                   std::vector<std::size_t> n_values, std::size_t replicates,
                                   std::uint64_t master_seed, const SimulationOptions &opts = {}) {
  if (!(q > 0.0)) {
    throw PreconditionError("increment decay needs q > 0");
  }
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  if (n_values.empty()) {
    throw PreconditionError("increment decay needs at least one n");
  }
  std::vector<std::size_t> record;
  for (const std::size_t n : n_values) {
    record.push_back(n);
    record.push_back(n + 1);
  }
  SimulationOptions o = opts;
  o.couple_no_immigration = false;
  const auto batch = simulate_batch(env, n_values.back() + 1, replicates, master_seed, record, o);

  DecaySeries series;
  series.q = q;
  std::vector<double> inc(replicates);
  for (const std::size_t n : n_values) {
    const auto &a = batch.at(n).logW;
    const auto &b = batch.at(n + 1).logW;
    for (std::size_t i = 0; i < replicates; ++i) {
      inc[i] = std::pow(std::abs(b[i] - a[i]), q);
    }
    const double est = mean_of(inc);
    const double se = standard_error(inc, est);
    series.rows.push_back({n, est, se, est > 0.0 && est > 5.0 * se});
  }
  detail::fit_decay(series);
  return series;
}

// ---------------------------------------------------------------------------
// Berry-Esseen sup distance
// ---------------------------------------------------------------------------

struct BerryEsseenRow {
  std::size_t n;
  double sup_dev;
  /// Largest binomial standard error of F_n over the grid.
  double se_max;
  /// sup_dev * sqrt(n).
  double c_fit;
};

struct BerryEsseenResult {
  std::vector<BerryEsseenRow> rows;
  std::vector<std::string> warnings;
  /// max over n of sup_dev * sqrt(n).
  double c_fit = 0.0;
  /// max / min of sup_dev * sqrt(n) across n.
  double c_ratio = 0.0;

  bool stable() const { return c_ratio < 2.0; }
};

namespace detail {

inline std::vector<std::string> grid_warnings(std::span<const double> grid) {
  std::vector<std::string> w;
  if (grid.empty() || grid.front() > -4.0 || grid.back() < 4.0) {
    w.emplace_back("grid does not span [-4, 4]");
  }
  double max_step = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    max_step = std::max(max_step, grid[i] - grid[i - 1]);
  }
  if (max_step > 0.05 + 1e-12) {
    w.emplace_back("grid step exceeds 0.05; the sup distance may be underestimated");
  }
  return w;
}

inline BerryEsseenRow sup_distance_row(std::span<const double> standardized,
                                       std::span<const double> grid, std::size_t n) {
  const auto cdf = empirical_cdf(standardized, grid);
  BerryEsseenRow row{n, 0.0, 0.0, 0.0};
  const auto r = static_cast<double>(cdf.replicates);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = cdf.values[i];
    row.sup_dev = std::max(row.sup_dev, std::abs(f - std_normal_cdf(grid[i])));
    row.se_max = std::max(row.se_max, std::sqrt(f * (1.0 - f) / r));
  }
  row.c_fit = row.sup_dev * std::sqrt(static_cast<double>(n));
  return row;
}

inline void summarize_c(BerryEsseenResult &res) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto &r : res.rows) {
    lo = std::min(lo, r.c_fit);
    hi = std::max(hi, r.c_fit);
  }
  res.c_fit = hi;
  res.c_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Berry-Esseen check on already standardized samples, one set per n.
inline BerryEsseenResult berry_esseen_from_samples(const std::vector<std::vector<double>> &samples,
                                                   const std::vector<std::size_t> &n_list,
                                                   std::vector<double> grid) {
  grid = detail::sorted_grid(std::move(grid));
  BerryEsseenResult res;
  res.warnings = detail::grid_warnings(grid);
  for (std::size_t c = 0; c < n_list.size(); ++c) {
    res.rows.push_back(detail::sup_distance_row(samples.at(c), grid, n_list[c]));
  }
  detail::summarize_c(res);
  return res;
}

/**
 * sup over the grid of |F_n(x) - Phi(x)| per n, with C fitted as the max of
 * sup * sqrt(n); stability means the spread across n stays under 2x.
 */
inline BerryEsseenResult berry_esseen_sup(const EnvironmentModel &env,
                                          const std::vector<std::size_t> &n_list,
                                          std::size_t replicates, std::vector<double> grid,
                                          std::uint64_t master_seed,
                                          const SimulationOptions &opts = {}) {
  detail::require_clt_env(env);
  detail::check_ascending(n_list);
  const auto m = log_mean_moments(env);
  SimulationOptions o = opts;
  o.couple_no_immigration = false;
  const auto batch = simulate_batch(env, n_list.back(), replicates, master_seed, n_list, o);
  std::vector<std::vector<double>> samples;
  for (const std::size_t n : n_list) {
    samples.push_back(standardize(batch.at(n).logZ, n, m));
  }
  return berry_esseen_from_samples(samples, n_list, std::move(grid));
}

// ---------------------------------------------------------------------------
// Laplace transform spot-check
// ---------------------------------------------------------------------------

struct LaplaceRow {
  double t;
  double phi_hat;
  double se;
  /// (log t)^r phi_hat(t); NaN for t < e.
  double logt_pow_r_times_phi;
};

struct LaplaceResult {
  std::vector<LaplaceRow> rows;
  double r = 0.0;
  /// max / min of (log t)^r phi_hat over rows with t >= e.
  double ratio = 0.0;
  /// max of (log t)^r phi_hat over its value at the smallest t >= e.
  double growth = 0.0;
  /// Qualitative: the scaled transform does not explode (ratio < 10).
  bool bounded() const { return ratio < 10.0; }
};

/**
 * Monte Carlo E exp(-t Wbar) with Wbar_N standing in for Wbar, and the
 * scaled values (log t)^r phi_hat(t). A qualitative spot-check only.
 */
inline LaplaceResult laplace_decay(const EnvironmentModel &env, std::vector<double> t_grid,
                                   std::size_t horizon, std::size_t replicates, double r,
                                   std::uint64_t master_seed, const SimulationOptions &opts = {}) {
  if (env.has_immigration()) {
    throw PreconditionError("the Laplace spot-check concerns Wbar: immigration must be absent");
  }
  for (const double t : t_grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw PreconditionError("Laplace grid values must be finite and nonnegative");
    }
  }
  t_grid = detail::sorted_grid(std::move(t_grid));
  SimulationOptions o = opts;
  o.couple_no_immigration = false;
  const auto batch = simulate_batch(env, horizon, replicates, master_seed, {horizon}, o);
  const auto &log_w = batch.at(horizon).logW;

  LaplaceResult res;
  res.r = r;
  std::vector<double> vals(replicates);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double first = 0.0;
  for (const double t : t_grid) {
    LaplaceRow row{t, 1.0, 0.0, std::numeric_limits<double>::quiet_NaN()};
    if (t > 0.0) {
      for (std::size_t i = 0; i < replicates; ++i) {
        vals[i] = std::exp(-t * std::exp(log_w[i]));
      }
      row.phi_hat = mean_of(vals);
      row.se = standard_error(vals, row.phi_hat);
    }
    if (t >= std::numbers::e) {
      row.logt_pow_r_times_phi = std::pow(std::log(t), r) * row.phi_hat;
      if (std::isinf(lo)) {
        first = row.logt_pow_r_times_phi;
      }
      lo = std::min(lo, row.logt_pow_r_times_phi);
      hi = std::max(hi, row.logt_pow_r_times_phi);
    }
    res.rows.push_back(row);
  }
  res.ratio = hi > 0.0 ? (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) : 0.0;
  res.growth = first > 0.0 ? hi / first : 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// Moment stability
// ---------------------------------------------------------------------------

struct MomentRow {
  std::size_t n;
  double r;
  double estimate;
  double se;
};

struct MomentStability {
  std::vector<MomentRow> rows;
  /// Among rows with n >= 10: max - 3 se <= 2 (min + 3 se).
  bool stable = true;
  double ratio = 1.0;
};

/// E|log W_n|^r per n; should show no trend beyond noise.
inline MomentStability moment_stability(const EnvironmentModel &env, double r,
                                        std::vector<std::size_t> n_list, std::size_t replicates,
                                        std::uint64_t master_seed,
                                        const SimulationOptions &opts = {}) {
  if (!(r > 0.0)) {
    throw PreconditionError("moment stability needs r > 0");
  }
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.empty()) {
    throw PreconditionError("moment stability needs at least one n");
  }
  SimulationOptions o = opts;
  o.couple_no_immigration = false;
  const auto batch = simulate_batch(env, n_list.back(), replicates, master_seed, n_list, o);

  MomentStability out;
  std::vector<double> vals(replicates);
  const MomentRow *lo = nullptr;
  const MomentRow *hi = nullptr;
  for (const std::size_t n : n_list) {
    const auto &lw = batch.at(n).logW;
    for (std::size_t i = 0; i < replicates; ++i) {
      vals[i] = std::pow(std::abs(lw[i]), r);
    }
    const double est = mean_of(vals);
    out.rows.push_back({n, r, est, standard_error(vals, est)});
  }
  for (const auto &row : out.rows) {
    if (row.n < 10) {
      continue;
    }
    if (lo == nullptr || row.estimate < lo->estimate) {
      lo = &row;
    }
    if (hi == nullptr || row.estimate > hi->estimate) {
      hi = &row;
    }
  }
  if (lo != nullptr && hi != nullptr) {
    out.ratio = lo->estimate > 0.0 ? hi->estimate / lo->estimate
                                   : std::numeric_limits<double>::infinity();
    out.stable = hi->estimate - 3.0 * hi->se <= 2.0 * (lo->estimate + 3.0 * lo->se);
  }
  return out;
}

} // namespace bpire

#endif // BPIRE_MC_VERIFY_HPP
