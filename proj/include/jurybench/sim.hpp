// Copyright 2026 The jurybench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "jurybench/analytics.hpp"
#include "jurybench/log_prob.hpp"
#include "jurybench/params.hpp"
#include "jurybench/rng.hpp"

namespace jurybench {

// ---------------------------------------------------------------------------
// Adversary strategies
// ---------------------------------------------------------------------------

/// Pack AD into the first T occupations as evenly as possible; anything past
/// T*s spills into later occupations.
struct OptimalFrontT {};
/// Spread AD as evenly as possible over all m occupations.
struct UniformSpread {};
struct CustomAllocation {
  AdversaryAllocation allocation;
};

using AdversaryStrategy = std::variant<OptimalFrontT, UniformSpread, CustomAllocation>;

inline AdversaryAllocation resolve_allocation(const SystemParams& params, const AdversaryStrategy& strategy) {
  params.validate();
  AdversaryAllocation alloc;
  if (std::holds_alternative<OptimalFrontT>(strategy)) {
    alloc = clamped_allocation(params.adversaries, params.threshold, params.jury_size, params.shards);
  } else if (std::holds_alternative<UniformSpread>(strategy)) {
    alloc.counts.assign(params.jury_size, params.adversaries / params.jury_size);
    for (std::uint64_t i = 0; i < params.adversaries % params.jury_size; ++i) ++alloc.counts[i];
  } else {
    alloc = std::get<CustomAllocation>(strategy).allocation;
    if (alloc.occupations() != params.jury_size) {
      throw std::invalid_argument("custom allocation has " + std::to_string(alloc.occupations()) +
                                  " entries, expected m = " + std::to_string(params.jury_size));
    }
    if (alloc.total() != params.adversaries) {
      throw std::invalid_argument("custom allocation sums to " + std::to_string(alloc.total()) +
                                  ", expected AD = " + std::to_string(params.adversaries));
    }
  }
  alloc.validate(params.shards);
  return alloc;
}

// ---------------------------------------------------------------------------
// One epoch
// ---------------------------------------------------------------------------

/// Occupation-major seating: schedule[occupation][jury] is true for an adversary.
using Schedule = std::vector<std::vector<bool>>;

struct EpochOutcome {
  std::uint64_t epoch = 0;
  std::vector<std::uint64_t> per_jury_adversaries;
  std::vector<std::uint64_t> safety_failures;    // juries with >= T adversaries
  std::vector<std::uint64_t> liveness_failures;  // juries with >= m - T + 1
  std::uint64_t seed = 0;

  friend bool operator==(const EpochOutcome&, const EpochOutcome&) = default;
};

/// Counts adversaries per jury of a fixed schedule and flags both events.
inline EpochOutcome score_schedule(const Schedule& schedule, const SystemParams& params) {
  params.validate();
  if (schedule.size() != params.jury_size) throw std::invalid_argument("schedule must have m occupation rows");
  EpochOutcome out;
  out.per_jury_adversaries.assign(params.shards, 0);
  for (const auto& row : schedule) {
    if (row.size() != params.shards) throw std::invalid_argument("schedule rows must have s jury columns");
    for (std::size_t j = 0; j < row.size(); ++j) out.per_jury_adversaries[j] += row[j] ? 1 : 0;
  }
  const std::uint64_t halt = params.liveness_threshold();
  for (std::uint64_t j = 0; j < params.shards; ++j) {
    if (out.per_jury_adversaries[j] >= params.threshold) out.safety_failures.push_back(j);
    if (out.per_jury_adversaries[j] >= halt) out.liveness_failures.push_back(j);
  }
  return out;
}

/// Each occupation's s members are dealt to the s juries by an independent
/// uniform permutation.
template <class Rng>
Schedule draw_schedule(const AdversaryAllocation& alloc, std::uint64_t shards, Rng& rng) {
  Schedule schedule;
  schedule.reserve(alloc.occupations());
  std::vector<std::uint8_t> row(shards);
  for (const std::uint64_t bad : alloc.counts) {
    std::fill(row.begin(), row.end(), 0);
    std::fill_n(row.begin(), static_cast<std::ptrdiff_t>(bad), 1);
    seeded_shuffle(row, rng);
    schedule.emplace_back(row.begin(), row.end());
  }
  return schedule;
}

inline EpochOutcome assign_epoch(const SystemParams& params, const AdversaryStrategy& strategy, std::uint64_t seed,
                                 std::uint64_t epoch = 0) {
  const auto alloc = resolve_allocation(params, strategy);
  SplitMix64 rng(seed);
  auto out = score_schedule(draw_schedule(alloc, params.shards, rng), params);
  out.epoch = epoch;
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// A binomial proportion with its Wilson score interval.
struct Rate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  /// Standard error of the point estimate.
  double standard_error() const {
    return trials == 0 ? 0.0 : std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
  }
};

inline Rate wilson(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054) {
  Rate r;
  r.hits = hits;
  r.trials = trials;
  if (trials == 0) return r;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  r.rate = p;
  r.lo = std::max(0.0, std::min(p, center - half));
  r.hi = std::min(1.0, std::max(p, center + half));
  return r;
}

/// Exact per-jury and any-jury probabilities from full enumeration.
struct ExhaustiveResult {
  mpz_class placements;
  LogProb perjury_safety;
  LogProb system_safety;
  LogProb perjury_liveness;
  LogProb system_liveness;
};

struct TrialReport {
  SystemParams params;
  AdversaryAllocation allocation;
  std::uint64_t trials = 0;
  std::uint64_t base_seed = 0;
  // The designated jury is jury 0.
  Rate perjury_safety;
  Rate system_safety;
  Rate perjury_liveness;
  Rate system_liveness;
  LogProb analytic_perjury_safety;
  LogProb analytic_perjury_liveness;
  std::optional<LogProb> analytic_system_safety;  // absent when the DP guard trips
  std::optional<LogProb> analytic_system_liveness;
  std::optional<ExhaustiveResult> exhaustive;
};

namespace detail {

struct EventCounts {
  std::uint64_t perjury_safety = 0;
  std::uint64_t system_safety = 0;
  std::uint64_t perjury_liveness = 0;
  std::uint64_t system_liveness = 0;
};

/// Allocation-free epoch evaluation for the hot loops.
class EpochKernel {
 public:
  EpochKernel(const AdversaryAllocation& alloc, const SystemParams& params)
      : alloc_(alloc), threshold_(params.threshold), halt_(params.liveness_threshold()), row_(params.shards),
        counts_(params.shards) {}

  EventCounts run(std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::fill(counts_.begin(), counts_.end(), 0);
    for (const std::uint64_t bad : alloc_.counts) {
      std::fill(row_.begin(), row_.end(), 0);
      std::fill_n(row_.begin(), static_cast<std::ptrdiff_t>(bad), 1);
      seeded_shuffle(row_, rng);
      for (std::size_t j = 0; j < row_.size(); ++j) counts_[j] += row_[j];
    }
    EventCounts e;
    e.perjury_safety = counts_[0] >= threshold_;
    e.perjury_liveness = counts_[0] >= halt_;
    for (const auto c : counts_) {
      e.system_safety |= c >= threshold_;
      e.system_liveness |= c >= halt_;
    }
    return e;
  }

 private:
  const AdversaryAllocation& alloc_;
  std::uint64_t threshold_;
  std::uint64_t halt_;
  std::vector<std::uint8_t> row_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace detail

/// Enumerates every adversary placement (one A_i-subset of juries per
/// occupation, all equally likely). Refuses instances with more than `guard`
/// placements.
inline ExhaustiveResult exhaustive(const SystemParams& params, const AdversaryAllocation& alloc,
                                   double guard = 1e7) {
  params.validate();
  if (alloc.occupations() != params.jury_size) throw std::invalid_argument("allocation must have m entries");
  alloc.validate(params.shards);
  const std::uint64_t s = params.shards;
  double bound = 1.0;
  for (const auto a : alloc.counts) bound *= mpz_class(detail::binomial(s, a)).get_d();
  if (bound > guard || s > 63) {
    throw GuardExceeded(bound, guard,
                        "exhaustive: " + format_sci(bound) + " placements exceed the guard of " + format_sci(guard));
  }

  // Every A_i-subset of {0..s-1} as a bitmask.
  std::vector<std::vector<std::uint64_t>> subsets;
  for (const auto a : alloc.counts) {
    std::vector<std::uint64_t> masks;
    std::vector<bool> pick(s, false);
    std::fill_n(pick.begin(), a, true);
    do {
      std::uint64_t mask = 0;
      for (std::uint64_t j = 0; j < s; ++j) mask |= pick[j] ? (1ULL << j) : 0;
      masks.push_back(mask);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    subsets.push_back(std::move(masks));
  }

  const std::uint64_t threshold = params.threshold;
  const std::uint64_t halt = params.liveness_threshold();
  std::vector<std::uint64_t> counts(s, 0);
  std::uint64_t total = 0, pj_safe = 0, sys_safe = 0, pj_live = 0, sys_live = 0;
  auto walk = [&](auto&& self, std::size_t occ) -> void {
    if (occ == subsets.size()) {
      ++total;
      pj_safe += counts[0] >= threshold;
      pj_live += counts[0] >= halt;
      const auto worst = *std::max_element(counts.begin(), counts.end());
      sys_safe += worst >= threshold;
      sys_live += worst >= halt;
      return;
    }
    for (const auto mask : subsets[occ]) {
      for (std::uint64_t j = 0; j < s; ++j) counts[j] += (mask >> j) & 1;
      self(self, occ + 1);
      for (std::uint64_t j = 0; j < s; ++j) counts[j] -= (mask >> j) & 1;
    }
  };
  walk(walk, 0);

  const mpz_class den(static_cast<unsigned long>(total));
  auto frac = [&](std::uint64_t k) { return ratio(mpz_class(static_cast<unsigned long>(k)), den); };
  return {den, frac(pj_safe), frac(sys_safe), frac(pj_live), frac(sys_live)};
}

/// Runs `trials` independent epochs. Trial i uses seed derive_seed(base_seed, i),
/// so the result does not depend on `threads`.
inline TrialReport monte_carlo(const SystemParams& params, const AdversaryStrategy& strategy, std::uint64_t trials,
                               std::uint64_t base_seed, unsigned threads = 1) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  TrialReport report;
  report.params = params;
  report.allocation = resolve_allocation(params, strategy);
  report.trials = trials;
  report.base_seed = base_seed;

  threads = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(threads, trials)));
  std::vector<detail::EventCounts> partial(threads);
  auto work = [&](unsigned w) {
    detail::EpochKernel kernel(report.allocation, params);
    const std::uint64_t begin = trials * w / threads;
    const std::uint64_t end = trials * (w + 1) / threads;
    auto& acc = partial[w];
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto e = kernel.run(derive_seed(base_seed, i));
      acc.perjury_safety += e.perjury_safety;
      acc.system_safety += e.system_safety;
      acc.perjury_liveness += e.perjury_liveness;
      acc.system_liveness += e.system_liveness;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  detail::EventCounts sum;
  for (const auto& p : partial) {
    sum.perjury_safety += p.perjury_safety;
    sum.system_safety += p.system_safety;
    sum.perjury_liveness += p.perjury_liveness;
    sum.system_liveness += p.system_liveness;
  }
  report.perjury_safety = wilson(sum.perjury_safety, trials);
  report.system_safety = wilson(sum.system_safety, trials);
  report.perjury_liveness = wilson(sum.perjury_liveness, trials);
  report.system_liveness = wilson(sum.system_liveness, trials);

  report.analytic_perjury_safety = jury_tail_prob(report.allocation, params.shards, params.threshold);
  report.analytic_perjury_liveness = jury_tail_prob(report.allocation, params.shards, params.liveness_threshold());
  try {
    report.analytic_system_safety = any_jury_tail_prob(report.allocation, params.shards, params.threshold);
    report.analytic_system_liveness =
        any_jury_tail_prob(report.allocation, params.shards, params.liveness_threshold());
  } catch (const GuardExceeded&) {
    report.analytic_system_safety.reset();
    report.analytic_system_liveness.reset();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Long runs
// ---------------------------------------------------------------------------

struct LongRunStats {
  std::uint64_t epochs = 0;
  /// Completed runs, each ended by a system safety failure.
  std::uint64_t failures = 0;
  /// Mean epochs to the first failure, counting the failing epoch; absent when
  /// no run completed.
  std::optional<double> mean_first_failure;
  /// Epochs of the trailing run that never failed.
  std::uint64_t censored_epochs = 0;
  bool censored() const { return censored_epochs > 0; }
};

/// Simulates consecutive epochs and restarts the clock after every epoch in
/// which some jury is manipulated.
inline LongRunStats long_run(const SystemParams& params, const AdversaryStrategy& strategy, std::uint64_t epochs,
                             std::uint64_t base_seed) {
  if (epochs < 1) throw std::invalid_argument("long_run: epochs must be >= 1");
  const auto alloc = resolve_allocation(params, strategy);
  detail::EpochKernel kernel(alloc, params);
  LongRunStats out;
  out.epochs = epochs;
  std::uint64_t run_length = 0;
  std::uint64_t completed_epochs = 0;
  for (std::uint64_t e = 0; e < epochs; ++e) {
    ++run_length;
    if (kernel.run(derive_seed(base_seed, e)).system_safety) {
      ++out.failures;
      completed_epochs += run_length;
      run_length = 0;
    }
  }
  out.censored_epochs = run_length;
  if (out.failures > 0) {
    out.mean_first_failure = static_cast<double>(completed_epochs) / static_cast<double>(out.failures);
  }
  return out;
}

}  // namespace jurybench
