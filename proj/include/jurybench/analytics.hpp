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
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jurybench/log_prob.hpp"
#include "jurybench/params.hpp"

namespace jurybench {

namespace detail {

inline mpz_class binomial(std::uint64_t n, std::uint64_t k) {
  mpz_class r;
  if (k > n) return r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline mpz_class power(std::uint64_t base, std::uint64_t exp) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
  return r;
}

inline std::string bound(const char* name, std::uint64_t v) { return std::string(name) + " = " + std::to_string(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Traditional (single-class) committees
// ---------------------------------------------------------------------------

/// Pr[X >= x] for X ~ Hypergeometric(population n, t marked, sample m),
/// summed over exact big-integer binomials. Infeasible terms contribute 0.
inline LogProb hypergeom_tail(std::uint64_t n, std::uint64_t t, std::uint64_t m, std::uint64_t x) {
  if (t > n) throw std::invalid_argument("hypergeom_tail: t <= n violated (" + detail::bound("t", t) + ")");
  if (m == 0 || m > n) {
    throw std::invalid_argument("hypergeom_tail: 0 < m <= n violated (" + detail::bound("m", m) + ")");
  }
  if (x > m) throw std::invalid_argument("hypergeom_tail: x <= m violated (" + detail::bound("x", x) + ")");

  const std::uint64_t honest = n - t;
  const std::uint64_t lo = std::max<std::uint64_t>(x, m > honest ? m - honest : 0);
  const std::uint64_t hi = std::min(m, t);
  mpz_class sum = 0;
  for (std::uint64_t k = lo; k <= hi; ++k) {
    sum += detail::binomial(t, k) * detail::binomial(honest, m - k);
  }
  return ratio(sum, detail::binomial(n, m));
}

// ---------------------------------------------------------------------------
// Class-based juries
// ---------------------------------------------------------------------------

/// Adversary members per occupation; counts[i] is A_i.
struct AdversaryAllocation {
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  std::size_t occupations() const { return counts.size(); }

  /// Every A_i must fit in the s seats of its occupation.
  void validate(std::uint64_t shards) const {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > shards) {
        throw std::invalid_argument("allocation infeasible: A_" + std::to_string(i) + " = " +
                                    std::to_string(counts[i]) + " exceeds s = " + std::to_string(shards));
      }
    }
  }

  friend bool operator==(const AdversaryAllocation&, const AdversaryAllocation&) = default;
};

/// The allocation maximizing the front-T product: AD spread as evenly as
/// possible over the first T occupations, larger shares first.
inline AdversaryAllocation optimal_allocation(std::uint64_t adversaries, std::uint64_t threshold,
                                              std::uint64_t jury_size, std::uint64_t shards) {
  if (threshold == 0 || threshold > jury_size) {
    throw std::invalid_argument("optimal_allocation: 1 <= T <= m violated (" + detail::bound("T", threshold) + ")");
  }
  if (adversaries > threshold * shards) {
    const std::uint64_t spill = adversaries - threshold * shards;
    throw AllocationOverflow(spill, "optimal_allocation: AD = " + std::to_string(adversaries) + " exceeds T*s = " +
                                        std::to_string(threshold * shards) + " by " + std::to_string(spill));
  }
  AdversaryAllocation a;
  a.counts.assign(jury_size, 0);
  const std::uint64_t base = adversaries / threshold;
  const std::uint64_t extra = adversaries % threshold;
  for (std::uint64_t i = 0; i < threshold; ++i) a.counts[i] = base + (i < extra ? 1 : 0);
  return a;
}

/// Like optimal_allocation, but an overflowing adversary fills the front T
/// occupations to capacity and spills the rest left to right beyond T.
inline AdversaryAllocation clamped_allocation(std::uint64_t adversaries, std::uint64_t threshold,
                                              std::uint64_t jury_size, std::uint64_t shards, bool* overflowed = nullptr) {
  if (overflowed) *overflowed = false;
  if (threshold == 0 || threshold > jury_size) {
    throw std::invalid_argument("clamped_allocation: 1 <= T <= m violated (" + detail::bound("T", threshold) + ")");
  }
  if (adversaries <= threshold * shards) return optimal_allocation(adversaries, threshold, jury_size, shards);
  if (adversaries > jury_size * shards) {
    throw std::invalid_argument("clamped_allocation: AD = " + std::to_string(adversaries) + " exceeds s*m");
  }
  if (overflowed) *overflowed = true;
  AdversaryAllocation a;
  a.counts.assign(jury_size, 0);
  std::uint64_t left = adversaries;
  for (auto& c : a.counts) {
    c = std::min(left, shards);
    left -= c;
  }
  return a;
}

/// Probability that a designated jury draws an adversary in each of the
/// first T occupations: prod_{i<T} A_i / s.
inline LogProb manipulation_prob(const AdversaryAllocation& alloc, std::uint64_t shards, std::uint64_t threshold) {
  if (threshold > alloc.occupations()) {
    throw std::invalid_argument("manipulation_prob: T exceeds the number of occupations");
  }
  alloc.validate(shards);
  mpz_class num = 1;
  for (std::uint64_t i = 0; i < threshold; ++i) num *= alloc.counts[i];
  return ratio(num, detail::power(shards, threshold));
}

struct MaxManipulation {
  AdversaryAllocation allocation;
  LogProb exact;
  /// (AD / (T*s))^T, the closed-form bound.
  LogProb approximation;
  /// log(exact) - log(approximation); <= 0 since the integer split never beats the mean.
  double log_gap = 0.0;
};

inline MaxManipulation max_manipulation_prob(const SystemParams& params) {
  params.validate();
  MaxManipulation r;
  r.allocation = optimal_allocation(params.adversaries, params.threshold, params.jury_size, params.shards);
  r.exact = manipulation_prob(r.allocation, params.shards, params.threshold);
  r.approximation = LogProb::from_rational(mpq_class(detail::power(params.adversaries, params.threshold),
                                                     detail::power(params.threshold * params.shards, params.threshold)));
  r.log_gap = (r.exact.is_zero() || r.approximation.is_zero()) ? 0.0 : r.exact.log() - r.approximation.log();
  return r;
}

/// Pr[a designated jury seats >= k adversaries] when occupation i contributes
/// an adversary independently with probability A_i / s (Poisson-binomial tail).
inline LogProb jury_tail_prob(const AdversaryAllocation& alloc, std::uint64_t shards, std::uint64_t k) {
  const std::size_t m = alloc.occupations();
  if (k > m) throw std::invalid_argument("jury_tail_prob: k <= m violated (" + detail::bound("k", k) + ")");
  alloc.validate(shards);
  // ways[j]: weighted count of seat patterns with j adversaries, denominator s^m.
  std::vector<mpz_class> ways(m + 1);
  ways[0] = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t bad = alloc.counts[i];
    const std::uint64_t good = shards - bad;
    for (std::size_t j = i + 2; j-- > 0;) {
      ways[j] *= good;
      if (j > 0) ways[j] += ways[j - 1] * bad;
    }
  }
  mpz_class tail = 0;
  for (std::size_t j = k; j <= m; ++j) tail += ways[j];
  return ratio(tail, detail::power(shards, m));
}

/// Pr[at least one of the s juries seats >= k adversaries] when each
/// occupation's A_i adversaries occupy a uniformly random A_i-subset of juries.
/// Exact DP over histograms of per-jury counts; throws GuardExceeded if the
/// state space grows past `max_states`.
inline LogProb any_jury_tail_prob(const AdversaryAllocation& alloc, std::uint64_t shards, std::uint64_t k,
                                  std::size_t max_states = 2'000'000) {
  const std::size_t m = alloc.occupations();
  if (k > m) throw std::invalid_argument("any_jury_tail_prob: k <= m violated (" + detail::bound("k", k) + ")");
  alloc.validate(shards);
  if (k == 0) return LogProb::one();

  using Histogram = std::vector<std::uint32_t>;  // hist[c] = juries holding c adversaries, c < k
  std::map<Histogram, mpz_class> states;
  Histogram genesis(k, 0);
  genesis[0] = static_cast<std::uint32_t>(shards);
  states.emplace(genesis, 1);
  mpz_class total = 1;

  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t pick = alloc.counts[i];
    total *= detail::binomial(shards, pick);
    std::map<Histogram, mpz_class> next;
    for (const auto& [hist, weight] : states) {
      Histogram taken(k, 0);
      // Choose taken[c] juries at level c to receive an adversary; none may
      // leave level k-1 since that would reach k.
      auto recurse = [&](auto&& self, std::size_t level, std::uint64_t remaining, mpz_class w) -> void {
        if (level == k) {
          if (remaining != 0) return;
          Histogram h = hist;
          for (std::size_t c = 0; c < k; ++c) h[c] -= taken[c];
          for (std::size_t c = 0; c + 1 < k; ++c) h[c + 1] += taken[c];
          next[h] += w;
          if (next.size() > max_states) {
            throw GuardExceeded(static_cast<double>(next.size()), static_cast<double>(max_states),
                                "any_jury_tail_prob: state space exceeds " + std::to_string(max_states));
          }
          return;
        }
        const std::uint64_t cap = level + 1 == k ? 0 : std::min<std::uint64_t>(hist[level], remaining);
        for (std::uint64_t a = 0; a <= cap; ++a) {
          taken[level] = static_cast<std::uint32_t>(a);
          self(self, level + 1, remaining - a, w * detail::binomial(hist[level], a));
        }
        taken[level] = 0;
      };
      recurse(recurse, 0, pick, weight);
    }
    states = std::move(next);
  }
  mpz_class survivors = 0;
  for (const auto& [hist, weight] : states) survivors += weight;
  return ratio(total - survivors, total);
}

/// Adversary seats that suffice to halt a sentence: m - T + 1.
inline std::uint64_t liveness_threshold(const SystemParams& params) {
  params.validate();
  return params.liveness_threshold();
}

// ---------------------------------------------------------------------------
// Time and throughput arithmetic
// ---------------------------------------------------------------------------

inline constexpr double kSecondsPerYear = 8760.0 * 3600.0;

/// Expected years until the first failing epoch, (1/p) * epoch duration.
/// std::nullopt means p = 0: the system never fails.
inline std::optional<double> time_to_fail(const LogProb& per_epoch, double epoch_seconds) {
  if (!(epoch_seconds > 0.0)) throw std::invalid_argument("time_to_fail: epoch duration must be positive");
  if (per_epoch.is_zero()) return std::nullopt;
  return std::exp(-per_epoch.log()) * epoch_seconds / kSecondsPerYear;
}

/// Transactions per hour for s shards each closing a block every interval.
inline double throughput(std::uint64_t shards, std::uint64_t block_txs, double interval_seconds) {
  if (!(interval_seconds > 0.0)) throw std::invalid_argument("throughput: interval must be positive");
  return static_cast<double>(shards) * static_cast<double>(block_txs) * 3600.0 / interval_seconds;
}

// ---------------------------------------------------------------------------
// Shard-count solver
// ---------------------------------------------------------------------------

enum class ShardingModel { kTraditional, kClassBased };

struct ShardQuery {
  std::uint64_t nodes = 2000;
  std::uint64_t adversaries = 0;
  ShardingModel model = ShardingModel::kClassBased;
  MajorityRule majority = MajorityRule::kCeil;  // traditional
  double threshold_fraction = 0.7;              // class-based
  double target = 1e-6;
};

/// Per-jury failure probability at s shards, m = floor(n / s).
/// `overflowed` reports whether the class-based allocation had to spill.
inline LogProb per_jury_failure(const ShardQuery& q, std::uint64_t shards, bool* overflowed = nullptr) {
  if (overflowed) *overflowed = false;
  if (shards == 0 || shards > q.nodes) throw std::invalid_argument("per_jury_failure: 1 <= s <= n violated");
  const std::uint64_t m = q.nodes / shards;
  if (q.model == ShardingModel::kTraditional) {
    return hypergeom_tail(q.nodes, q.adversaries, m, majority_threshold(m, q.majority));
  }
  const std::uint64_t t = threshold_from_fraction(q.threshold_fraction, m);
  const auto params = SystemParams::from_nodes(q.nodes, shards, t, q.adversaries);
  const auto alloc = clamped_allocation(params.adversaries, params.threshold, params.jury_size, params.shards,
                                        overflowed);
  return manipulation_prob(alloc, params.shards, params.threshold);
}

struct ShardLimit {
  enum class Status { kLimited, kUnbounded, kNotAchievable, kWholeRange };
  Status status = Status::kLimited;
  /// Largest s whose failure is <= target with every smaller s also <= target.
  std::uint64_t shards = 0;
  std::optional<LogProb> at_limit;
  std::optional<LogProb> beyond_limit;  // at shards + 1
};

/// Scans s = 1, 2, ... and stops at the first shard count whose per-jury
/// failure probability exceeds the target.
inline ShardLimit max_shards_for_target(const ShardQuery& q) {
  if (!(q.target > 0.0) || !(q.target < 1.0)) throw std::invalid_argument("target must lie in (0, 1)");
  if (q.nodes == 0) throw std::invalid_argument("node count n must be >= 1");
  if (q.adversaries > q.nodes) throw std::invalid_argument("adversary count AD exceeds n");
  ShardLimit out;
  if (q.adversaries == 0) {
    out.status = ShardLimit::Status::kUnbounded;
    out.shards = q.nodes;
    out.at_limit = LogProb::zero();
    return out;
  }
  const mpq_class target(q.target);
  std::optional<LogProb> previous;
  for (std::uint64_t s = 1; s <= q.nodes; ++s) {
    LogProb p = per_jury_failure(q, s);
    if (*p.exact() > target) {
      if (!previous) {
        out.status = ShardLimit::Status::kNotAchievable;
        out.beyond_limit = std::move(p);
        return out;
      }
      out.shards = s - 1;
      out.at_limit = std::move(previous);
      out.beyond_limit = std::move(p);
      return out;
    }
    previous = std::move(p);
  }
  out.status = ShardLimit::Status::kWholeRange;
  out.shards = q.nodes;
  out.at_limit = std::move(previous);
  return out;
}

}  // namespace jurybench
