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

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "jurybench/rng.hpp"

namespace jurybench {

/// Identity of a participant ("person") in the court system.
struct NodeId {
  std::string value;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

/// The court office refused an event; state is left unchanged.
class MembershipRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PendingEntry {
  NodeId node;
  std::size_t occupation = 0;
  std::uint64_t report_time = 0;  // sequence number of the reporting event

  friend bool operator==(const PendingEntry&, const PendingEntry&) = default;
};

struct CourtConfig {
  std::size_t occupations = 5;
  /// Front-of-queue count admitted from every occupation at once.
  std::size_t batch_k = 1;
  /// Consecutive silent windows tolerated; one more and the node is pruned.
  std::uint64_t missed_limit = 1;
  /// Root of the reshuffle seeds used by automatic admissions.
  std::uint64_t seed = 0;
  /// Admit as soon as admission_check() is ready after any event.
  bool auto_admit = true;
  /// Juries already seated at genesis, occupation-major.
  std::vector<std::vector<NodeId>> genesis_grid;

  friend bool operator==(const CourtConfig&, const CourtConfig&) = default;
};

// Input events.
struct Report {
  NodeId node;
  std::size_t occupation = 0;
  friend bool operator==(const Report&, const Report&) = default;
};
struct ChangeOccupation {
  NodeId node;
  std::size_t occupation = 0;
  friend bool operator==(const ChangeOccupation&, const ChangeOccupation&) = default;
};
struct Heartbeat {
  NodeId node;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};
/// Closes the current heartbeat window.
struct Tick {
  friend bool operator==(const Tick&, const Tick&) = default;
};
/// Explicit admission, for logs written with auto_admit off.
struct AdmissionTriggered {
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const AdmissionTriggered&, const AdmissionTriggered&) = default;
};
/// Re-draws every jury without admitting anyone (a new court).
struct Reshuffle {
  std::uint64_t seed = 0;
  friend bool operator==(const Reshuffle&, const Reshuffle&) = default;
};

using MembershipEvent = std::variant<Report, ChangeOccupation, Heartbeat, Tick, AdmissionTriggered, Reshuffle>;

struct AdmissionRecord {
  std::uint64_t seq = 0;
  std::uint64_t epoch = 0;  // epoch the admission opened
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> lengths_before;
  std::vector<std::size_t> lengths_after;
  std::vector<std::vector<NodeId>> admitted;  // per occupation, queue order

  friend bool operator==(const AdmissionRecord&, const AdmissionRecord&) = default;
};

struct TickRecord {
  std::uint64_t seq = 0;
  std::uint64_t window = 0;  // the window that closed
  std::vector<std::size_t> lengths;  // pending counts published after the tick
  std::vector<NodeId> pruned;
  std::vector<NodeId> refilled;

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct NodeRecord {
  enum class Where { kPending, kSeated, kPruned };
  Where where = Where::kPending;
  std::size_t occupation = 0;
  std::uint64_t last_seen_window = 0;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

/// Complete court-office state. A plain value: copies are snapshots.
struct CourtState {
  CourtConfig config;
  std::vector<std::deque<PendingEntry>> queues;
  /// grid[occupation][jury]; an empty cell marks an under-strength jury.
  std::vector<std::vector<std::optional<NodeId>>> grid;
  std::uint64_t epoch = 0;
  std::uint64_t window = 0;
  std::uint64_t seq = 0;  // input events applied so far
  std::uint64_t admissions = 0;
  std::map<NodeId, NodeRecord> nodes;
  std::vector<NodeId> pruned;
  std::vector<AdmissionRecord> admission_history;
  std::vector<TickRecord> tick_history;

  std::size_t juries() const { return grid.empty() ? 0 : grid.front().size(); }

  std::vector<std::size_t> queue_lengths() const {
    std::vector<std::size_t> out;
    out.reserve(queues.size());
    for (const auto& q : queues) out.push_back(q.size());
    return out;
  }

  std::vector<std::size_t> under_strength_juries() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < juries(); ++j) {
      const bool short_seat = std::any_of(grid.begin(), grid.end(), [j](const auto& row) { return !row[j]; });
      if (short_seat) out.push_back(j);
    }
    return out;
  }

  friend bool operator==(const CourtState&, const CourtState&) = default;
};

struct AdmissionReadiness {
  bool ready = false;
  std::size_t batch = 0;
};

/// The court office: single-writer state machine over MembershipEvent.
/// Every accepted input event is appended to log(); replaying that log into a
/// fresh Court with the same config reproduces state() exactly.
class Court {
 public:
  explicit Court(CourtConfig config = {}) {
    if (config.occupations == 0) throw std::invalid_argument("court needs at least one occupation");
    if (config.batch_k == 0) throw std::invalid_argument("batch_k must be >= 1");
    state_.config = config;
    state_.queues.resize(config.occupations);
    state_.grid.resize(config.occupations);
    if (!config.genesis_grid.empty()) {
      if (config.genesis_grid.size() != config.occupations) {
        throw std::invalid_argument("genesis grid must have one row per occupation");
      }
      const std::size_t width = config.genesis_grid.front().size();
      for (std::size_t occ = 0; occ < config.occupations; ++occ) {
        const auto& row = config.genesis_grid[occ];
        if (row.size() != width) throw std::invalid_argument("genesis grid rows must have equal length");
        for (const auto& id : row) {
          if (!state_.nodes.emplace(id, NodeRecord{NodeRecord::Where::kSeated, occ, 0}).second) {
            throw std::invalid_argument("genesis grid repeats node '" + id.value + "'");
          }
          state_.grid[occ].emplace_back(id);
        }
      }
    }
  }

  const CourtState& state() const { return state_; }
  const std::vector<MembershipEvent>& log() const { return log_; }

  /// Queues `node` at the tail of `occupation`; returns its 0-based position.
  std::size_t report(const NodeId& node, std::size_t occupation) {
    require_occupation(occupation);
    if (state_.nodes.contains(node)) throw MembershipRejected("node '" + node.value + "' already reported");
    const std::size_t position = state_.queues[occupation].size();
    begin(Report{node, occupation});
    enqueue(node, occupation);
    settle();
    return position;
  }

  /// Moves a pending node to the tail of another (or the same) queue.
  void change_occupation(const NodeId& node, std::size_t occupation) {
    require_occupation(occupation);
    const auto& rec = require_known(node);
    if (rec.where == NodeRecord::Where::kSeated) {
      throw MembershipRejected("node '" + node.value + "' is seated in a jury and cannot change occupation");
    }
    begin(ChangeOccupation{node, occupation});
    auto& q = state_.queues[rec.occupation];
    q.erase(std::find_if(q.begin(), q.end(), [&](const PendingEntry& e) { return e.node == node; }));
    enqueue(node, occupation);
    settle();
  }

  void heartbeat(const NodeId& node) {
    require_known(node);
    begin(Heartbeat{node});
    state_.nodes.at(node).last_seen_window = state_.window;
  }

  /// Closes the current window: prunes nodes silent for more than
  /// missed_limit windows, then refills vacant seats from queue heads.
  TickRecord tick() {
    begin(Tick{});
    TickRecord rec;
    rec.seq = state_.seq;
    rec.window = state_.window;
    for (auto& [id, node] : state_.nodes) {
      if (node.where == NodeRecord::Where::kPruned) continue;
      if (state_.window - node.last_seen_window <= state_.config.missed_limit) continue;
      if (node.where == NodeRecord::Where::kPending) {
        auto& q = state_.queues[node.occupation];
        q.erase(std::find_if(q.begin(), q.end(), [&](const PendingEntry& e) { return e.node == id; }));
      } else {
        for (auto& cell : state_.grid[node.occupation]) {
          if (cell == id) cell.reset();
        }
      }
      node.where = NodeRecord::Where::kPruned;
      state_.pruned.push_back(id);
      rec.pruned.push_back(id);
    }
    ++state_.window;
    for (std::size_t occ = 0; occ < state_.grid.size(); ++occ) {
      for (auto& cell : state_.grid[occ]) {
        auto& q = state_.queues[occ];
        if (cell || q.empty()) continue;
        cell = q.front().node;
        state_.nodes.at(q.front().node).where = NodeRecord::Where::kSeated;
        rec.refilled.push_back(q.front().node);
        q.pop_front();
      }
    }
    rec.lengths = state_.queue_lengths();
    state_.tick_history.push_back(rec);
    settle();
    return rec;
  }

  AdmissionReadiness admission_check() const {
    const auto lengths = state_.queue_lengths();
    const std::size_t shortest = *std::min_element(lengths.begin(), lengths.end());
    return {shortest >= state_.config.batch_k, state_.config.batch_k};
  }

  /// Admits the front batch_k of every queue, widening the grid by batch_k
  /// juries, and re-deals every occupation row by a seeded permutation.
  AdmissionRecord admit_and_reshuffle(std::uint64_t seed) {
    const auto ready = admission_check();
    if (!ready.ready) throw MembershipRejected("admission not ready: some queue is shorter than batch_k");
    begin(AdmissionTriggered{ready.batch, seed});
    return admit(seed);
  }

  /// Re-deals every jury (a new court) without admitting anyone.
  void reshuffle(std::uint64_t seed) {
    begin(Reshuffle{seed});
    deal(seed);
    ++state_.epoch;
  }

  void apply(const MembershipEvent& event) {
    std::visit(
        [this](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, Report>) {
            report(e.node, e.occupation);
          } else if constexpr (std::is_same_v<E, ChangeOccupation>) {
            change_occupation(e.node, e.occupation);
          } else if constexpr (std::is_same_v<E, Heartbeat>) {
            heartbeat(e.node);
          } else if constexpr (std::is_same_v<E, Tick>) {
            tick();
          } else if constexpr (std::is_same_v<E, AdmissionTriggered>) {
            if (e.batch != state_.config.batch_k) {
              throw MembershipRejected("admission batch " + std::to_string(e.batch) + " differs from batch_k " +
                                       std::to_string(state_.config.batch_k));
            }
            admit_and_reshuffle(e.seed);
          } else {
            reshuffle(e.seed);
          }
        },
        event);
  }

  /// Throws std::logic_error naming the first broken structural invariant.
  void check_invariants() const {
    auto fail = [](const std::string& what) { throw std::logic_error("court invariant violated: " + what); };
    const std::size_t m = state_.config.occupations;
    if (state_.queues.size() != m || state_.grid.size() != m) fail("one queue and one grid row per occupation");
    std::map<NodeId, int> seen;
    for (std::size_t occ = 0; occ < m; ++occ) {
      const auto& q = state_.queues[occ];
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].occupation != occ) fail("queue entry filed under the wrong occupation");
        if (i > 0 && q[i - 1].report_time >= q[i].report_time) fail("queue not FIFO by report_time");
        const auto it = state_.nodes.find(q[i].node);
        if (it == state_.nodes.end() || it->second.where != NodeRecord::Where::kPending ||
            it->second.occupation != occ) {
          fail("pending node '" + q[i].node.value + "' has an inconsistent record");
        }
        ++seen[q[i].node];
      }
      if (state_.grid[occ].size() != state_.juries()) fail("grid rows have unequal width");
      for (const auto& cell : state_.grid[occ]) {
        if (!cell) continue;
        const auto it = state_.nodes.find(*cell);
        if (it == state_.nodes.end() || it->second.where != NodeRecord::Where::kSeated ||
            it->second.occupation != occ) {
          fail("seated node '" + cell->value + "' has an inconsistent record");
        }
        ++seen[*cell];
      }
    }
    for (const auto& id : state_.pruned) {
      const auto it = state_.nodes.find(id);
      if (it == state_.nodes.end() || it->second.where != NodeRecord::Where::kPruned) fail("pruned list mismatch");
      ++seen[id];
    }
    for (const auto& [id, count] : seen) {
      if (count != 1) fail("node '" + id.value + "' appears " + std::to_string(count) + " times");
    }
    if (seen.size() != state_.nodes.size()) fail("node registry lists nodes that are nowhere");
  }

 private:
  void require_occupation(std::size_t occupation) const {
    if (occupation >= state_.config.occupations) {
      throw MembershipRejected("occupation " + std::to_string(occupation) + " out of range [0, " +
                               std::to_string(state_.config.occupations) + ")");
    }
  }

  const NodeRecord& require_known(const NodeId& node) const {
    const auto it = state_.nodes.find(node);
    if (it == state_.nodes.end() || it->second.where == NodeRecord::Where::kPruned) {
      throw MembershipRejected("unknown node '" + node.value + "'");
    }
    return it->second;
  }

  // Validation passed: record the event and stamp its sequence number.
  void begin(MembershipEvent event) {
    log_.push_back(std::move(event));
    ++state_.seq;
  }

  void enqueue(const NodeId& node, std::size_t occupation) {
    state_.queues[occupation].push_back({node, occupation, state_.seq});
    auto& rec = state_.nodes[node];
    rec.where = NodeRecord::Where::kPending;
    rec.occupation = occupation;
    rec.last_seen_window = state_.window;
  }

  // Automatic admissions triggered by the event just applied.
  void settle() {
    if (!state_.config.auto_admit) return;
    while (admission_check().ready) admit(derive_seed(state_.config.seed, state_.admissions));
  }

  AdmissionRecord admit(std::uint64_t seed) {
    const std::size_t k = state_.config.batch_k;
    AdmissionRecord rec;
    rec.seq = state_.seq;
    rec.epoch = state_.epoch + 1;
    rec.batch = k;
    rec.seed = seed;
    rec.lengths_before = state_.queue_lengths();
    rec.admitted.resize(state_.queues.size());
    for (std::size_t occ = 0; occ < state_.queues.size(); ++occ) {
      auto& q = state_.queues[occ];
      for (std::size_t i = 0; i < k; ++i) {
        rec.admitted[occ].push_back(q.front().node);
        state_.grid[occ].emplace_back(q.front().node);
        state_.nodes.at(q.front().node).where = NodeRecord::Where::kSeated;
        q.pop_front();
      }
    }
    deal(seed);
    ++state_.epoch;
    ++state_.admissions;
    rec.lengths_after = state_.queue_lengths();
    state_.admission_history.push_back(rec);
    return rec;
  }

  // Row `occ` is permuted by SplitMix64(derive_seed(seed, occ)) + Fisher-Yates.
  void deal(std::uint64_t seed) {
    for (std::size_t occ = 0; occ < state_.grid.size(); ++occ) {
      SplitMix64 rng(derive_seed(seed, occ));
      seeded_shuffle(state_.grid[occ], rng);
    }
  }

  CourtState state_;
  std::vector<MembershipEvent> log_;
};

}  // namespace jurybench
