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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace jurybench {

/// Thrown when an adversary cannot be packed into the front-T occupations.
class AllocationOverflow : public std::domain_error {
 public:
  AllocationOverflow(std::uint64_t spill, const std::string& what)
      : std::domain_error(what), spill_(spill) {}
  /// Adversary members left over once every front-T occupation is full.
  std::uint64_t spill() const { return spill_; }

 private:
  std::uint64_t spill_;
};

/// Thrown when a computation would exceed a configured work bound.
class GuardExceeded : public std::runtime_error {
 public:
  GuardExceeded(double bound, double limit, const std::string& what)
      : std::runtime_error(what), bound_(bound), limit_(limit) {}
  double bound() const { return bound_; }
  double limit() const { return limit_; }

 private:
  double bound_;
  double limit_;
};

/// How the majority threshold m/2 is rounded for odd jury sizes.
enum class MajorityRule { kCeil, kFloor };

inline std::uint64_t majority_threshold(std::uint64_t jury_size, MajorityRule rule = MajorityRule::kCeil) {
  return rule == MajorityRule::kCeil ? (jury_size + 1) / 2 : jury_size / 2;
}

/// Sentence threshold from a fraction of the jury, rounded up (0.7 * 200 -> 140,
/// 0.7 * 57 -> 40). The epsilon absorbs binary representation error in `fraction`.
inline std::uint64_t threshold_from_fraction(double fraction, std::uint64_t jury_size) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("threshold fraction must lie in (0, 1]");
  }
  const double raw = std::ceil(fraction * static_cast<double>(jury_size) - 1e-9);
  return raw < 0.0 ? 0 : static_cast<std::uint64_t>(raw);
}

/// Global model parameters of the class-based sharding model.
struct SystemParams {
  std::uint64_t nodes = 0;        // n
  std::uint64_t shards = 1;       // s, also the number of juries
  std::uint64_t jury_size = 1;    // m, also the number of occupations
  std::uint64_t threshold = 1;    // T, votes needed for a sentence
  std::uint64_t adversaries = 0;  // AD
  double epoch_seconds = 1800.0;
  std::uint64_t block_txs = 1000;

  /// n = s * m.
  static SystemParams class_based(std::uint64_t shards, std::uint64_t jury_size, std::uint64_t threshold,
                                  std::uint64_t adversaries) {
    SystemParams p;
    p.nodes = shards * jury_size;
    p.shards = shards;
    p.jury_size = jury_size;
    p.threshold = threshold;
    p.adversaries = adversaries;
    p.validate();
    return p;
  }

  /// m = floor(n / s); the n mod s remainder nodes are left out of the model.
  static SystemParams from_nodes(std::uint64_t nodes, std::uint64_t shards, std::uint64_t threshold,
                                 std::uint64_t adversaries) {
    if (shards == 0) throw std::invalid_argument("shard count s must be >= 1");
    SystemParams p;
    p.nodes = nodes;
    p.shards = shards;
    p.jury_size = nodes / shards;
    p.threshold = threshold;
    p.adversaries = adversaries;
    p.validate();
    return p;
  }

  std::uint64_t liveness_threshold() const { return jury_size - threshold + 1; }

  void validate() const {
    if (shards < 1) throw std::invalid_argument("shard count s must be >= 1");
    if (jury_size < 1) throw std::invalid_argument("jury size m must be >= 1 (n >= s required)");
    if (nodes < shards * jury_size) throw std::invalid_argument("node count n must be >= s * m");
    if (nodes - shards * jury_size >= shards) {
      throw std::invalid_argument("jury size m must equal floor(n / s)");
    }
    if (threshold > jury_size) {
      throw std::invalid_argument("threshold T = " + std::to_string(threshold) + " exceeds jury size m = " +
                                  std::to_string(jury_size));
    }
    if (threshold < (jury_size + 1) / 2) {
      throw std::invalid_argument("threshold T = " + std::to_string(threshold) + " is below ceil(m/2) = " +
                                  std::to_string((jury_size + 1) / 2));
    }
    if (threshold == 0) throw std::invalid_argument("threshold T must be >= 1");
    if (adversaries > nodes) throw std::invalid_argument("adversary count AD exceeds n");
    if (!(epoch_seconds > 0.0)) throw std::invalid_argument("epoch duration must be positive");
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

}  // namespace jurybench
