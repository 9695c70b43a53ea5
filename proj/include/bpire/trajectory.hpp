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

#ifndef BPIRE_TRAJECTORY_HPP
#define BPIRE_TRAJECTORY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bpire/count.hpp"
#include "bpire/env_model.hpp"
#include "bpire/rng.hpp"
#include "bpire/sampler.hpp"

namespace bpire {

/// Batch request exceeds the configured memory budget.
class ResourceError : public std::runtime_error {
public:
  ResourceError(const std::string &what, std::size_t requested_bytes)
      : std::runtime_error(what), requested_bytes_(requested_bytes) {}
  std::size_t requested_bytes() const noexcept { return requested_bytes_; }

private:
  std::size_t requested_bytes_;
};

struct SimulationOptions {
  std::uint64_t promotion_threshold = kDefaultPromotionThreshold;
  /// Worker threads for batch runs; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Added to every replicate index to form its stream id.
  std::uint64_t stream_offset = 0;
  /// Also simulate the no-immigration path on shared randomness.
  bool couple_no_immigration = false;
  std::size_t max_batch_bytes = std::size_t{8} << 30;
};

/// Substream tags: generation in the high bits, purpose in the low three.
enum class DrawPurpose : std::uint32_t { Atom = 0, Offspring = 1, Surplus = 2, Immigration = 3 };

constexpr std::uint32_t substream_tag(std::size_t generation, DrawPurpose purpose) noexcept {
  return static_cast<std::uint32_t>(generation << 3) | static_cast<std::uint32_t>(purpose);
}

inline constexpr std::size_t kMaxGenerations = std::size_t{1} << 29;

struct Trajectory {
  std::size_t n = 0;
  std::vector<std::uint32_t> atom_idx;
  std::vector<double> logZ;
  std::vector<double> S;
  std::vector<double> logW;
  std::optional<std::vector<double>> logZbar;
};

namespace detail {

inline void require_valid(const EnvironmentModel &env) {
  const auto report = validate(env);
  if (!report.structurally_valid()) {
    for (const auto &e : report.entries) {
      if (!e.passed && e.name != "sigma_positive") {
        throw PreconditionError("environment failed validation: " + e.name + " (" + e.detail + ")");
      }
    }
  }
}

/**
 * Generation-by-generation state of one replicate. The environment draw of
 * generation k comes from its own substream, so S_k is identical across
 * promotion thresholds and coupling modes for a given stream.
 */
class PathStepper {
public:
  PathStepper(const EnvironmentModel &env, const std::vector<double> &log_means,
              const RngStream &rng, const SimulationOptions &opts)
      : env_(env), log_means_(log_means), rng_(rng), threshold_(opts.promotion_threshold),
        coupled_(opts.couple_no_immigration) {}

  std::size_t generation() const noexcept { return generation_; }
  double log_z() const noexcept { return z_.log_value(); }
  double log_zbar() const noexcept { return zbar_.log_value(); }
  double s() const noexcept { return s_; }
  const Count &z() const noexcept { return z_; }
  std::uint32_t last_atom() const noexcept { return atom_; }

  void step() {
    const std::size_t g = generation_;
    auto atom_gen = rng_.substream(substream_tag(g, DrawPurpose::Atom));
    atom_ = static_cast<std::uint32_t>(sample_atom(env_, atom_gen));
    const EnvAtom &atom = env_[atom_];

    auto off_gen = rng_.substream(substream_tag(g, DrawPurpose::Offspring));
    Count total;
    if (coupled_) {
      const Count total_bar = sample_offspring_total(zbar_, atom.offspring, off_gen, threshold_);
      const Count surplus_pop = subtract(z_, zbar_, threshold_);
      Count surplus = Count::exact(0);
      if (!surplus_pop.is_zero()) {
        auto sur_gen = rng_.substream(substream_tag(g, DrawPurpose::Surplus));
        surplus = sample_offspring_total(surplus_pop, atom.offspring, sur_gen, threshold_);
      }
      total = add(total_bar, surplus, threshold_);
      zbar_ = total_bar;
    } else {
      total = sample_offspring_total(z_, atom.offspring, off_gen, threshold_);
    }

    auto imm_gen = rng_.substream(substream_tag(g, DrawPurpose::Immigration));
    const std::uint64_t immigrants = sample_immigration(atom.immigration, imm_gen);
    z_ = add(total, Count::exact(immigrants), threshold_);
    s_ += log_means_[atom_];
    ++generation_;
  }

private:
  const EnvironmentModel &env_;
  const std::vector<double> &log_means_;
  RngStream rng_;
  std::uint64_t threshold_;
  bool coupled_;
  std::size_t generation_ = 0;
  Count z_ = Count::exact(1);
  Count zbar_ = Count::exact(1);
  double s_ = 0.0;
  std::uint32_t atom_ = 0;
};

inline std::vector<double> atom_log_means(const EnvironmentModel &env) {
  std::vector<double> out;
  out.reserve(env.size());
  for (const auto &a : env.atoms()) {
    out.push_back(std::log(mean_offspring(a)));
  }
  return out;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) {
    return requested;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(begin, end) over contiguous replicate chunks on `threads` workers.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned threads, Body &&body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(count, t * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &w : workers) {
    w.join();
  }
  for (const auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

inline std::vector<std::size_t> normalized_record(std::vector<std::size_t> record, std::size_t n) {
  std::sort(record.begin(), record.end());
  record.erase(std::unique(record.begin(), record.end()), record.end());
  if (!record.empty() && record.back() > n) {
    throw PreconditionError("recorded generation exceeds the simulated horizon");
  }
  return record;
}

} // namespace detail

/**
 * One BPIRE path from Z_0 = 1 over n generations. Records log Z_k, the walk
 * S_k = sum_{j<k} log m_j, log W_k = log Z_k - S_k and the drawn atoms; with
 * coupling on, also the no-immigration path Zbar_k <= Z_k.
 */
inline Trajectory simulate_path(const EnvironmentModel &env, std::size_t n, const RngStream &rng,
                                bool couple_no_immigration = false,
                                SimulationOptions opts = {}) {
  detail::require_valid(env);
  check_promotion_threshold(opts.promotion_threshold);
  if (n > kMaxGenerations) {
    throw PreconditionError("too many generations");
  }
  opts.couple_no_immigration = couple_no_immigration;
  const auto log_means = detail::atom_log_means(env);
  detail::PathStepper stepper(env, log_means, rng, opts);

  Trajectory t;
  t.n = n;
  t.atom_idx.reserve(n);
  t.logZ.reserve(n + 1);
  t.S.reserve(n + 1);
  t.logW.reserve(n + 1);
  if (couple_no_immigration) {
    t.logZbar.emplace();
    t.logZbar->reserve(n + 1);
  }
  auto record = [&] {
    t.logZ.push_back(stepper.log_z());
    t.S.push_back(stepper.s());
    t.logW.push_back(t.logZ.back() - t.S.back());
    if (t.logZbar) {
      t.logZbar->push_back(stepper.log_zbar());
    }
  };
  record();
  for (std::size_t k = 0; k < n; ++k) {
    stepper.step();
    t.atom_idx.push_back(stepper.last_atom());
    record();
  }
  return t;
}

/// Column-major samples of recorded generations, replicate order preserved.
struct BatchSamples {
  struct Column {
    std::size_t generation = 0;
    std::vector<double> logZ;
    std::vector<double> S;
    std::vector<double> logW;
    /// Empty unless the batch ran coupled.
    std::vector<double> logZbar;

    /// log Wbar_k = log Zbar_k - S_k (coupled batches only).
    std::vector<double> logWbar() const {
      std::vector<double> out(logZbar.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = logZbar[i] - S[i];
      }
      return out;
    }
  };

  std::size_t replicates = 0;
  std::vector<Column> columns;

  const Column &at(std::size_t generation) const {
    for (const auto &c : columns) {
      if (c.generation == generation) {
        return c;
      }
    }
    throw std::out_of_range("generation " + std::to_string(generation) + " was not recorded");
  }
};

/**
 * R independent replicates; replicate i uses stream id stream_offset + i.
 * Output is independent of the thread count.
 */
inline BatchSamples simulate_batch(const EnvironmentModel &env, std::size_t n,
                                   std::size_t replicates, std::uint64_t master_seed,
                                   std::vector<std::size_t> record,
                                   const SimulationOptions &opts = {}) {
  detail::require_valid(env);
  check_promotion_threshold(opts.promotion_threshold);
  if (replicates == 0) {
    throw PreconditionError("batch needs at least one replicate");
  }
  if (n > kMaxGenerations) {
    throw PreconditionError("too many generations");
  }
  record = detail::normalized_record(std::move(record), n);

  const std::size_t ncols = opts.couple_no_immigration ? 4 : 3;
  const double bytes = static_cast<double>(replicates) * static_cast<double>(record.size()) *
                       static_cast<double>(ncols) * sizeof(double);
  if (bytes > static_cast<double>(opts.max_batch_bytes)) {
    throw ResourceError("batch output would need " + std::to_string(bytes) + " bytes",
                        static_cast<std::size_t>(bytes));
  }

  BatchSamples out;
  out.replicates = replicates;
  out.columns.resize(record.size());
  for (std::size_t c = 0; c < record.size(); ++c) {
    auto &col = out.columns[c];
    col.generation = record[c];
    col.logZ.resize(replicates);
    col.S.resize(replicates);
    col.logW.resize(replicates);
    if (opts.couple_no_immigration) {
      col.logZbar.resize(replicates);
    }
  }

  const auto log_means = detail::atom_log_means(env);
  detail::parallel_chunks(replicates, detail::resolve_threads(opts.threads),
                          [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      detail::PathStepper stepper(env, log_means, RngStream(master_seed, opts.stream_offset + i),
                                  opts);
      std::size_t c = 0;
      for (std::size_t k = 0; k <= n && c < record.size(); ++k) {
        if (k > 0) {
          stepper.step();
        }
        if (record[c] == k) {
          auto &col = out.columns[c];
          col.logZ[i] = stepper.log_z();
          col.S[i] = stepper.s();
          col.logW[i] = col.logZ[i] - col.S[i];
          if (opts.couple_no_immigration) {
            col.logZbar[i] = stepper.log_zbar();
          }
          ++c;
        }
      }
    }
  });
  return out;
}

/**
 * The environment walk S_k alone, drawn from the same atom substreams as
 * simulate_batch, so S agrees with the branching batch for equal seeds.
 * Returns one vector per recorded generation (sorted, deduplicated).
 */
inline std::vector<std::vector<double>> simulate_walk_batch(const EnvironmentModel &env,
                                                            std::size_t n, std::size_t replicates,
                                                            std::uint64_t master_seed,
                                                            std::vector<std::size_t> record,
                                                            const SimulationOptions &opts = {}) {
  detail::require_valid(env);
  if (replicates == 0) {
    throw PreconditionError("batch needs at least one replicate");
  }
  record = detail::normalized_record(std::move(record), n);
  std::vector<std::vector<double>> out(record.size(), std::vector<double>(replicates));
  const auto log_means = detail::atom_log_means(env);
  detail::parallel_chunks(replicates, detail::resolve_threads(opts.threads),
                          [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const RngStream rng(master_seed, opts.stream_offset + i);
      double s = 0.0;
      std::size_t c = 0;
      for (std::size_t k = 0; k <= n && c < record.size(); ++k) {
        if (k > 0) {
          auto gen = rng.substream(substream_tag(k - 1, DrawPurpose::Atom));
          s += log_means[sample_atom(env, gen)];
        }
        if (record[c] == k) {
          out[c][i] = s;
          ++c;
        }
      }
    }
  });
  return out;
}

} // namespace bpire

#endif // BPIRE_TRAJECTORY_HPP
