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

#include "jurybench/membership.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "jurybench/event_log.hpp"

namespace jurybench {
namespace {

NodeId id(const std::string& s) { return NodeId{s}; }

std::vector<std::string> names(const std::deque<PendingEntry>& q) {
  std::vector<std::string> out;
  for (const auto& e : q) out.push_back(e.node.value);
  return out;
}

std::string fixture(const std::string& name) { return std::string(JURYBENCH_DATA_DIR) + "/fixtures/" + name; }

Court replay_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  return replay(in);
}

CourtConfig table_config(std::size_t batch_k, bool auto_admit = true) {
  CourtConfig c;
  c.occupations = 5;
  c.batch_k = batch_k;
  c.auto_admit = auto_admit;
  c.genesis_grid = {{id("!")}, {id("@")}, {id("#")}, {id("$")}, {id("*")}};
  return c;
}

// Reports of the pending people at moment one.
void report_first_arrivals(Court& court) {
  for (const auto& [name, occ] : std::vector<std::pair<std::string, std::size_t>>{
           {"A", 0}, {"B", 0}, {"C", 0}, {"D", 0}, {"E", 1}, {"F", 1}, {"G", 2}, {"H", 3}, {"I", 4}}) {
    court.report(id(name), occ);
  }
}

TEST(CourtReportTest, FirstArrivalsQueueLengths) {
  Court court(table_config(4));
  report_first_arrivals(court);
  EXPECT_EQ(court.state().queue_lengths(), (std::vector<std::size_t>{4, 2, 1, 1, 1}));
  EXPECT_EQ(names(court.state().queues[0]), (std::vector<std::string>{"A", "B", "C", "D"}));
  court.check_invariants();
}

TEST(CourtReportTest, PositionIsDistanceFromHead) {
  Court court;
  EXPECT_EQ(court.report(id("x"), 2), 0u);
  EXPECT_EQ(court.report(id("y"), 2), 1u);
  EXPECT_EQ(court.report(id("z"), 3), 0u);
}

TEST(CourtReportTest, RejectsDuplicatesAndBadOccupation) {
  Court court;
  court.report(id("x"), 0);
  const auto before = court.state();
  EXPECT_THROW(court.report(id("x"), 1), MembershipRejected);
  EXPECT_THROW(court.report(id("y"), 5), MembershipRejected);
  EXPECT_EQ(court.state(), before);
  EXPECT_EQ(court.log().size(), 1u);
}

TEST(CourtChangeOccupationTest, MovesToTailOfTarget) {
  Court court(table_config(4));
  report_first_arrivals(court);
  court.change_occupation(id("B"), 2);
  EXPECT_EQ(names(court.state().queues[0]), (std::vector<std::string>{"A", "C", "D"}));
  EXPECT_EQ(names(court.state().queues[2]), (std::vector<std::string>{"G", "B"}));
  court.check_invariants();
}

TEST(CourtChangeOccupationTest, SameOccupationLosesSeniority) {
  Court court(table_config(4));
  report_first_arrivals(court);
  court.change_occupation(id("A"), 0);
  EXPECT_EQ(names(court.state().queues[0]), (std::vector<std::string>{"B", "C", "D", "A"}));
}

TEST(CourtChangeOccupationTest, RejectsSeatedAndUnknown) {
  Court court(table_config(4));
  EXPECT_THROW(court.change_occupation(id("!"), 1), MembershipRejected);
  EXPECT_THROW(court.change_occupation(id("nobody"), 1), MembershipRejected);
}

TEST(CourtAdmissionTest, ReadinessFollowsShortestQueue) {
  Court court(table_config(4, /*auto_admit=*/false));
  report_first_arrivals(court);
  EXPECT_FALSE(court.admission_check().ready);
  for (const auto& [name, occ] : std::vector<std::pair<std::string, std::size_t>>{
           {"J", 2}, {"K", 3}, {"L", 4}, {"M", 1}, {"N", 2}, {"O", 3}, {"P", 4},
           {"Q", 1}, {"R", 2}, {"S", 3}, {"T", 4}, {"U", 2}, {"V", 4}}) {
    court.report(id(name), occ);
  }
  EXPECT_EQ(court.state().queue_lengths(), (std::vector<std::size_t>{4, 4, 5, 4, 5}));
  const auto ready = court.admission_check();
  EXPECT_TRUE(ready.ready);
  EXPECT_EQ(ready.batch, 4u);

  Court empty(CourtConfig{});
  EXPECT_FALSE(empty.admission_check().ready);
}

TEST(CourtAdmissionTest, RejectsWhenNotReady) {
  Court court(table_config(4, false));
  report_first_arrivals(court);
  EXPECT_THROW(court.admit_and_reshuffle(1), MembershipRejected);
}

TEST(CourtAdmissionTest, WalkthroughReplay) {
  const Court court = replay_file(fixture("court_walkthrough.jsonl"));
  const auto& s = court.state();
  court.check_invariants();

  ASSERT_EQ(s.tick_history.size(), 2u);
  EXPECT_EQ(s.tick_history[0].lengths, (std::vector<std::size_t>{4, 2, 1, 1, 1}));
  ASSERT_EQ(s.admission_history.size(), 1u);
  EXPECT_EQ(s.admission_history[0].lengths_before, (std::vector<std::size_t>{4, 4, 5, 4, 5}));
  EXPECT_EQ(s.admission_history[0].lengths_after, (std::vector<std::size_t>{0, 0, 1, 0, 1}));
  EXPECT_EQ(s.tick_history[1].lengths, (std::vector<std::size_t>{0, 0, 1, 0, 1}));
  EXPECT_EQ(names(s.queues[2]), (std::vector<std::string>{"U"}));
  EXPECT_EQ(names(s.queues[4]), (std::vector<std::string>{"V"}));

  // Expected membership per occupation row; the order within a row is seed-dependent.
  const std::vector<std::set<std::string>> seated = {{"A", "C", "B", "D", "!"},
                                                     {"@", "Q", "M", "F", "E"},
                                                     {"R", "N", "#", "J", "G"},
                                                     {"S", "O", "H", "K", "$"},
                                                     {"T", "*", "P", "I", "L"}};
  ASSERT_EQ(s.juries(), 5u);
  for (std::size_t occ = 0; occ < 5; ++occ) {
    std::set<std::string> row;
    for (const auto& cell : s.grid[occ]) {
      ASSERT_TRUE(cell.has_value());
      row.insert(cell->value);
    }
    EXPECT_EQ(row, seated[occ]) << "occupation " << occ;
  }
  EXPECT_TRUE(s.under_strength_juries().empty());
}

TEST(CourtAdmissionTest, BatchOneFormsSingleJury) {
  CourtConfig c;
  c.occupations = 3;
  c.batch_k = 1;
  Court court(c);
  court.report(id("a"), 0);
  court.report(id("b"), 1);
  EXPECT_EQ(court.state().juries(), 0u);
  court.report(id("c"), 2);
  ASSERT_EQ(court.state().juries(), 1u);
  EXPECT_EQ(court.state().grid[0][0], id("a"));
  EXPECT_EQ(court.state().grid[1][0], id("b"));
  EXPECT_EQ(court.state().grid[2][0], id("c"));
}

TEST(CourtAdmissionTest, BatchOneFixtureAdmitsAsSoonAsEveryQueueIsNonEmpty) {
  const Court court = replay_file(fixture("court_walkthrough_batch1.jsonl"));
  const auto& s = court.state();
  court.check_invariants();
  ASSERT_FALSE(s.admission_history.empty());
  // I is the ninth report and the first moment every occupation has someone waiting.
  EXPECT_EQ(s.admission_history[0].seq, 9u);
  EXPECT_EQ(s.admission_history[0].lengths_before, (std::vector<std::size_t>{4, 2, 1, 1, 1}));
  EXPECT_EQ(s.admission_history[0].lengths_after, (std::vector<std::size_t>{3, 1, 0, 0, 0}));
  for (const auto& a : s.admission_history) {
    EXPECT_EQ(*std::min_element(a.lengths_before.begin(), a.lengths_before.end()), 1u);
  }
}

TEST(CourtHeartbeatTest, PrunesAfterMissedLimitPlusOneWindows) {
  CourtConfig c;
  c.occupations = 2;
  c.missed_limit = 1;
  c.batch_k = 3;
  Court court(c);
  court.report(id("quiet"), 0);
  court.report(id("busy"), 0);
  for (int w = 0; w < 3; ++w) {
    court.heartbeat(id("busy"));
    const auto rec = court.tick();
    if (w < 2) {
      EXPECT_TRUE(rec.pruned.empty());
    } else {
      // Reported in window 0, silent in windows 1 and 2.
      EXPECT_EQ(rec.pruned, (std::vector<NodeId>{id("quiet")}));
    }
  }
  EXPECT_EQ(names(court.state().queues[0]), (std::vector<std::string>{"busy"}));
  EXPECT_EQ(court.state().pruned, (std::vector<NodeId>{id("quiet")}));
  EXPECT_THROW(court.heartbeat(id("quiet")), MembershipRejected);
  EXPECT_THROW(court.heartbeat(id("ghost")), MembershipRejected);
  court.check_invariants();
}

TEST(CourtHeartbeatTest, SeatedNodeRefilledFromQueueHead) {
  CourtConfig c = table_config(4);
  c.missed_limit = 0;
  Court court(c);
  EXPECT_TRUE(court.tick().pruned.empty());  // genesis members count as seen in window 0
  for (const auto* n : {"@", "#", "$", "*"}) court.heartbeat(id(n));
  court.report(id("next"), 0);
  court.report(id("later"), 0);
  const auto rec = court.tick();
  EXPECT_EQ(rec.pruned, (std::vector<NodeId>{id("!")}));
  EXPECT_EQ(rec.refilled, (std::vector<NodeId>{id("next")}));
  EXPECT_EQ(court.state().grid[0][0], id("next"));
  EXPECT_EQ(names(court.state().queues[0]), (std::vector<std::string>{"later"}));
  EXPECT_TRUE(court.state().under_strength_juries().empty());
  court.check_invariants();
}

TEST(CourtHeartbeatTest, SeatStaysVacantWithoutCandidates) {
  CourtConfig c = table_config(4);
  c.missed_limit = 0;
  Court court(c);
  court.tick();
  for (const auto* n : {"!", "#", "$", "*"}) court.heartbeat(id(n));
  court.tick();
  EXPECT_FALSE(court.state().grid[1][0].has_value());
  EXPECT_EQ(court.state().under_strength_juries(), (std::vector<std::size_t>{0}));
  court.check_invariants();
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

TEST(ReplayTest, EmptyLogIsGenesis) {
  const Court court = replay_string("");
  EXPECT_EQ(court.state(), Court().state());
}

TEST(ReplayTest, DuplicateReportFailsAtItsLine) {
  const std::string log =
      "{\"v\":1,\"type\":\"report\",\"node\":\"A\",\"occupation\":0}\n"
      "{\"v\":1,\"type\":\"tick\"}\n"
      "{\"v\":1,\"type\":\"report\",\"node\":\"A\",\"occupation\":1}\n";
  try {
    replay_string(log);
    FAIL() << "expected ReplayError";
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ReplayTest, MalformedLinesReportLineNumbers) {
  auto line_of = [](const std::string& log) -> std::size_t {
    try {
      replay_string(log);
    } catch (const ReplayError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("{\"v\":1,\"type\":\"tick\"}\n{not json\n"), 2u);
  EXPECT_EQ(line_of("{\"v\":1,\"type\":\"tick\"}\n\n{\"v\":1,\"type\":\"bogus\"}\n"), 3u);
  EXPECT_EQ(line_of("{\"v\":2,\"type\":\"tick\"}\n"), 1u);
  EXPECT_EQ(line_of("{\"v\":1,\"type\":\"report\",\"node\":\"A\"}\n"), 1u);
  EXPECT_EQ(line_of("{\"v\":1,\"type\":\"tick\"}\n{\"v\":1,\"type\":\"genesis\",\"occupations\":3}\n"), 2u);
}

TEST(ReplayTest, LogRoundTripsByteForByte) {
  const std::string path = fixture("court_walkthrough.jsonl");
  std::ifstream in(path);
  std::stringstream original;
  original << in.rdbuf();
  const Court court = replay_string(original.str());
  std::ostringstream written;
  write_log(written, court);
  EXPECT_EQ(written.str(), original.str());
}

// ---------------------------------------------------------------------------
// Properties over random event sequences
// ---------------------------------------------------------------------------

class RandomCourtTest : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomCourtTest, InvariantsHoldAndReplayIsExact) {
  std::mt19937_64 gen(GetParam());
  CourtConfig c;
  c.occupations = 2 + gen() % 4;
  c.batch_k = 1 + gen() % 3;
  c.missed_limit = gen() % 3;
  c.seed = gen();
  c.auto_admit = gen() % 4 != 0;
  Court court(c);
  std::vector<NodeId> known;
  int next_id = 0;

  for (int step = 0; step < 400; ++step) {
    const CourtState before = court.state();
    const auto roll = gen() % 100;
    try {
      if (roll < 45) {
        const NodeId n{"n" + std::to_string(next_id++)};
        const std::size_t occ = gen() % c.occupations;
        const std::size_t pos = court.report(n, occ);
        known.push_back(n);
        if (!c.auto_admit) {
          EXPECT_EQ(pos, before.queues[occ].size());
          EXPECT_EQ(court.state().queues[occ].back().node, n);
        }
      } else if (roll < 60 && !known.empty()) {
        const NodeId n = known[gen() % known.size()];
        const std::size_t occ = gen() % c.occupations;
        court.change_occupation(n, occ);
        if (!c.auto_admit) {
          // Tail of the target; every other node keeps its relative order.
          EXPECT_EQ(court.state().queues[occ].back().node, n);
          for (std::size_t q = 0; q < c.occupations; ++q) {
            std::vector<std::string> was, now;
            for (const auto& e : before.queues[q]) {
              if (e.node != n) was.push_back(e.node.value);
            }
            for (const auto& e : court.state().queues[q]) {
              if (e.node != n) now.push_back(e.node.value);
            }
            EXPECT_EQ(was, now);
          }
        }
      } else if (roll < 85 && !known.empty()) {
        court.heartbeat(known[gen() % known.size()]);
      } else if (roll < 93) {
        court.tick();
      } else if (roll < 97) {
        const auto ready = court.admission_check();
        if (ready.ready) {
          const auto rec = court.admit_and_reshuffle(gen());
          for (std::size_t q = 0; q < c.occupations; ++q) {
            for (std::size_t i = 0; i < ready.batch; ++i) {
              EXPECT_EQ(rec.admitted[q][i], before.queues[q][i].node);  // seniority
            }
          }
        }
      } else {
        court.reshuffle(gen());
      }
    } catch (const MembershipRejected&) {
      EXPECT_EQ(court.state(), before);
    }
    ASSERT_NO_THROW(court.check_invariants()) << "step " << step;
    // Every reported node sits in exactly one place.
    std::size_t located = 0;
    for (const auto& q : court.state().queues) located += q.size();
    for (const auto& row : court.state().grid) {
      located += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const auto& x) { return x; }));
    }
    located += court.state().pruned.size();
    ASSERT_EQ(located, court.state().nodes.size());
  }

  std::ostringstream log;
  write_log(log, court);
  const Court again = replay_string(log.str());
  EXPECT_EQ(again.state(), court.state());
  const Court third = replay_string(log.str());
  EXPECT_EQ(dump_state(third.state()).dump(), dump_state(again.state()).dump());
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCourtTest, ::testing::Range<std::uint64_t>(1, 41));

// Each of the 25 members of a 5x5 grid should land in each jury column about
// equally often across many independently seeded re-deals. Every cell count is
// Binomial(10000, 1/5); with 125 cells a handful of 3-sigma excursions are
// expected from a fair shuffle, so the test bounds how many there are.
TEST(ReshuffleTest, UniformAcrossColumns) {
  CourtConfig c;
  c.occupations = 5;
  for (int occ = 0; occ < 5; ++occ) {
    std::vector<NodeId> row;
    for (int j = 0; j < 5; ++j) row.push_back(id(std::to_string(occ) + ":" + std::to_string(j)));
    c.genesis_grid.push_back(row);
  }
  const Court base(c);
  constexpr int kDeals = 10000;
  std::map<std::pair<std::string, std::size_t>, int> hits;
  for (int i = 0; i < kDeals; ++i) {
    Court court = base;
    court.reshuffle(static_cast<std::uint64_t>(i));
    for (const auto& row : court.state().grid) {
      for (std::size_t j = 0; j < row.size(); ++j) ++hits[{row[j]->value, j}];
    }
  }
  const double expected = kDeals / 5.0;
  const double sd = std::sqrt(kDeals * 0.2 * 0.8);
  ASSERT_EQ(hits.size(), 125u);
  int beyond3 = 0;
  for (const auto& [key, count] : hits) {
    const double z = std::abs(count - expected) / sd;
    if (z > 3.0) ++beyond3;
    EXPECT_LE(z, 4.0) << key.first << " in jury " << key.second;
  }
  // P(count >= 3) under a fair shuffle is about 0.5%.
  EXPECT_LE(beyond3, 2);
}

}  // namespace
}  // namespace jurybench
