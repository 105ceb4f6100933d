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

#include <nlohmann/json.hpp>

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "jurybench/membership.hpp"

// Line-delimited JSON event log for the court office.
//
// Line 1 may be a genesis record carrying the CourtConfig; every other line is
// one input event. Keys are written in a fixed order so fixtures can be
// compared byte for byte:
//
//   {"v":1,"type":"genesis","occupations":5,"batch_k":4,"missed_limit":1,"seed":7,"auto_admit":true,"grid":[["!"],...]}
//   {"v":1,"type":"report","node":"A","occupation":0}
//   {"v":1,"type":"change_occupation","node":"B","occupation":2}
//   {"v":1,"type":"heartbeat","node":"A"}
//   {"v":1,"type":"tick"}
//   {"v":1,"type":"admit","batch":4,"seed":11}
//   {"v":1,"type":"reshuffle","seed":12}

namespace jurybench {

inline constexpr int kEventLogVersion = 1;

/// Malformed or rejected log line. line() is 1-based.
class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson node_json(const std::optional<NodeId>& id) { return id ? ojson(id->value) : ojson(nullptr); }

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace detail

inline std::string to_line(const CourtConfig& config) {
  detail::ojson j;
  j["v"] = kEventLogVersion;
  j["type"] = "genesis";
  j["occupations"] = config.occupations;
  j["batch_k"] = config.batch_k;
  j["missed_limit"] = config.missed_limit;
  j["seed"] = config.seed;
  j["auto_admit"] = config.auto_admit;
  detail::ojson grid = detail::ojson::array();
  for (const auto& row : config.genesis_grid) {
    detail::ojson r = detail::ojson::array();
    for (const auto& id : row) r.push_back(id.value);
    grid.push_back(std::move(r));
  }
  j["grid"] = std::move(grid);
  return j.dump();
}

inline std::string to_line(const MembershipEvent& event) {
  detail::ojson j;
  j["v"] = kEventLogVersion;
  std::visit(
      [&j](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, Report>) {
          j["type"] = "report";
          j["node"] = e.node.value;
          j["occupation"] = e.occupation;
        } else if constexpr (std::is_same_v<E, ChangeOccupation>) {
          j["type"] = "change_occupation";
          j["node"] = e.node.value;
          j["occupation"] = e.occupation;
        } else if constexpr (std::is_same_v<E, Heartbeat>) {
          j["type"] = "heartbeat";
          j["node"] = e.node.value;
        } else if constexpr (std::is_same_v<E, Tick>) {
          j["type"] = "tick";
        } else if constexpr (std::is_same_v<E, AdmissionTriggered>) {
          j["type"] = "admit";
          j["batch"] = e.batch;
          j["seed"] = e.seed;
        } else {
          j["type"] = "reshuffle";
          j["seed"] = e.seed;
        }
      },
      event);
  return j.dump();
}

/// Serializes a court's config and accepted events; replay() inverts it.
inline void write_log(std::ostream& out, const Court& court) {
  out << to_line(court.state().config) << '\n';
  for (const auto& e : court.log()) out << to_line(e) << '\n';
}

inline CourtConfig parse_genesis(const nlohmann::json& j) {
  CourtConfig c;
  c.occupations = detail::field<std::size_t>(j, "occupations");
  c.batch_k = j.value("batch_k", c.batch_k);
  c.missed_limit = j.value("missed_limit", c.missed_limit);
  c.seed = j.value("seed", c.seed);
  c.auto_admit = j.value("auto_admit", c.auto_admit);
  if (j.contains("grid")) {
    for (const auto& row : j.at("grid")) {
      std::vector<NodeId> r;
      for (const auto& id : row) r.push_back(NodeId{id.get<std::string>()});
      c.genesis_grid.push_back(std::move(r));
    }
  }
  return c;
}

inline MembershipEvent parse_event(const nlohmann::json& j) {
  const auto type = detail::field<std::string>(j, "type");
  if (type == "report") {
    return Report{NodeId{detail::field<std::string>(j, "node")}, detail::field<std::size_t>(j, "occupation")};
  }
  if (type == "change_occupation") {
    return ChangeOccupation{NodeId{detail::field<std::string>(j, "node")},
                            detail::field<std::size_t>(j, "occupation")};
  }
  if (type == "heartbeat") return Heartbeat{NodeId{detail::field<std::string>(j, "node")}};
  if (type == "tick") return Tick{};
  if (type == "admit") {
    return AdmissionTriggered{detail::field<std::size_t>(j, "batch"), detail::field<std::uint64_t>(j, "seed")};
  }
  if (type == "reshuffle") return Reshuffle{detail::field<std::uint64_t>(j, "seed")};
  throw std::invalid_argument("unknown event type '" + type + "'");
}

/// Rebuilds a court from a log. `defaults` applies when the log has no
/// genesis line. An empty log yields the genesis state.
inline Court replay(std::istream& in, const CourtConfig& defaults = {}) {
  std::optional<Court> court;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(text);
      if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
      const int version = detail::field<int>(j, "v");
      if (version != kEventLogVersion) throw std::invalid_argument("unsupported log version " + std::to_string(version));
      if (detail::field<std::string>(j, "type") == "genesis") {
        if (court) throw std::invalid_argument("genesis record must be the first record");
        court.emplace(parse_genesis(j));
        continue;
      }
      if (!court) court.emplace(defaults);
      court->apply(parse_event(j));
    } catch (const nlohmann::json::exception& e) {
      throw ReplayError(line, std::string("malformed record: ") + e.what());
    } catch (const std::exception& e) {
      throw ReplayError(line, e.what());
    }
  }
  if (!court) court.emplace(defaults);
  return std::move(*court);
}

inline Court replay_string(const std::string& log, const CourtConfig& defaults = {}) {
  std::istringstream in(log);
  return replay(in, defaults);
}

/// Structured dump: queues in order, grid row-major by occupation.
inline nlohmann::ordered_json dump_state(const CourtState& s) {
  using detail::ojson;
  ojson j;
  j["schema"] = kEventLogVersion;
  j["occupations"] = s.config.occupations;
  j["batch_k"] = s.config.batch_k;
  j["missed_limit"] = s.config.missed_limit;
  j["epoch"] = s.epoch;
  j["window"] = s.window;
  j["seq"] = s.seq;
  j["juries"] = s.juries();
  j["queue_lengths"] = s.queue_lengths();
  ojson queues = ojson::array();
  for (const auto& q : s.queues) {
    ojson arr = ojson::array();
    for (const auto& e : q) arr.push_back(ojson{{"node", e.node.value}, {"report_time", e.report_time}});
    queues.push_back(std::move(arr));
  }
  j["queues"] = std::move(queues);
  ojson grid = ojson::array();
  for (const auto& row : s.grid) {
    ojson r = ojson::array();
    for (const auto& cell : row) r.push_back(detail::node_json(cell));
    grid.push_back(std::move(r));
  }
  j["grid"] = std::move(grid);
  j["under_strength"] = s.under_strength_juries();
  ojson pruned = ojson::array();
  for (const auto& id : s.pruned) pruned.push_back(id.value);
  j["pruned"] = std::move(pruned);
  ojson admissions = ojson::array();
  for (const auto& a : s.admission_history) {
    ojson admitted = ojson::array();
    for (const auto& row : a.admitted) {
      ojson r = ojson::array();
      for (const auto& id : row) r.push_back(id.value);
      admitted.push_back(std::move(r));
    }
    admissions.push_back(ojson{{"seq", a.seq},
                               {"epoch", a.epoch},
                               {"batch", a.batch},
                               {"seed", a.seed},
                               {"lengths_before", a.lengths_before},
                               {"lengths_after", a.lengths_after},
                               {"admitted", std::move(admitted)}});
  }
  j["admissions"] = std::move(admissions);
  ojson ticks = ojson::array();
  for (const auto& t : s.tick_history) {
    ojson pr = ojson::array();
    for (const auto& id : t.pruned) pr.push_back(id.value);
    ojson rf = ojson::array();
    for (const auto& id : t.refilled) rf.push_back(id.value);
    ticks.push_back(ojson{{"seq", t.seq},
                          {"window", t.window},
                          {"lengths", t.lengths},
                          {"pruned", std::move(pr)},
                          {"refilled", std::move(rf)}});
  }
  j["ticks"] = std::move(ticks);
  return j;
}

}  // namespace jurybench
