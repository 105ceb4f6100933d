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

// jurybench: failure analysis and simulation for class-based sharding.
//
//   jurybench fig2     [--n N] [--t LIST] [--s LO:HI] [--majority ceil|floor]
//   jurybench fig4     [--n N] [--ad AD] [--tfrac F] [--s LO:HI]
//   jurybench claims   [--n N] [--t T] [--ad AD] [--tfrac F] [--s S]
//   jurybench shards   [--n N] [--ad AD] [--model traditional|class] [--tfrac F] [--target P]
//   jurybench simulate CONFIG
//   jurybench replay   LOG
//
// Every command takes --format and --out PATH; replay formats are text|json,
// the rest csv|json. Relative output paths
// resolve against $JURYBENCH_OUT_DIR when it is set.
//
// Exit codes: 0 success, 2 usage or validation error, 3 guard violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "jurybench/commands.hpp"

namespace {

namespace fs = std::filesystem;
using namespace jurybench;
using namespace jurybench::commands;

constexpr int kExitUsage = 2;
constexpr int kExitGuard = 3;

fs::path output_dir() {
  const char* dir = std::getenv("JURYBENCH_OUT_DIR");
  return dir ? fs::path(dir) : fs::path();
}

fs::path resolve(const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : output_dir() / p;
}

// Writes `body` to --out when given, stdout otherwise.
template <class Body>
void emit(const std::string& out_path, Body&& body) {
  if (out_path.empty()) {
    body(std::cout);
    return;
  }
  const fs::path target = resolve(out_path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + target.string() + "' for writing");
  body(out);
}

MajorityRule parse_majority(const std::string& s) {
  if (s == "ceil") return MajorityRule::kCeil;
  if (s == "floor") return MajorityRule::kFloor;
  throw UsageError("majority must be ceil or floor");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure analysis and simulation for class-based blockchain sharding"};
  app.require_subcommand(1);

  std::string format = "csv";
  std::string out_path;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", out_path, "output file (stdout when omitted)");
  };

  Fig2Options f2;
  std::string f2_range = "2:34";
  std::string f2_majority = "ceil";
  auto* fig2_cmd = app.add_subcommand("fig2", "single-class committee failure versus shard count");
  fig2_cmd->add_option("--n", f2.nodes, "total nodes");
  fig2_cmd->add_option("--t", f2.adversaries, "adversary counts")->delimiter(',');
  fig2_cmd->add_option("--s", f2_range, "shard range LO:HI");
  fig2_cmd->add_option("--majority,--threshold", f2_majority, "rounding of m/2: ceil or floor");
  common(fig2_cmd);

  Fig4Options f4;
  std::string f4_range = "2:600";
  auto* fig4_cmd = app.add_subcommand("fig4", "class-based maximum manipulation probability versus shard count");
  fig4_cmd->add_option("--n", f4.nodes, "total nodes");
  fig4_cmd->add_option("--ad", f4.adversaries, "adversary nodes");
  fig4_cmd->add_option("--tfrac", f4.threshold_fraction, "sentence threshold as a fraction of m");
  fig4_cmd->add_option("--s", f4_range, "shard range LO:HI");
  common(fig4_cmd);

  ClaimsOptions cl;
  auto* claims_cmd = app.add_subcommand("claims", "recompute the headline security and throughput numbers");
  claims_cmd->add_option("--n", cl.nodes, "total nodes");
  claims_cmd->add_option("--t", cl.traditional_adversaries, "adversary nodes, single-class model");
  claims_cmd->add_option("--ad", cl.adversaries, "adversary nodes, class-based model");
  claims_cmd->add_option("--tfrac", cl.threshold_fraction, "sentence threshold as a fraction of m");
  claims_cmd->add_option("--s", cl.shards, "shard count for the per-jury claims");
  common(claims_cmd);

  ShardQuery sq;
  std::string sq_model = "class";
  std::string sq_majority = "ceil";
  auto* shards_cmd = app.add_subcommand("shards", "largest shard count meeting a failure target");
  shards_cmd->add_option("--n", sq.nodes, "total nodes");
  shards_cmd->add_option("--ad,--t", sq.adversaries, "adversary nodes");
  shards_cmd->add_option("--model", sq_model, "traditional or class")->check(CLI::IsMember({"traditional", "class"}));
  shards_cmd->add_option("--tfrac", sq.threshold_fraction, "sentence threshold as a fraction of m");
  shards_cmd->add_option("--majority,--threshold", sq_majority, "rounding of m/2 for the traditional model");
  shards_cmd->add_option("--target", sq.target, "per-jury failure target");
  common(shards_cmd);

  std::string config_path;
  std::string trials_override;
  std::string seed_override;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run from a config document");
  sim_cmd->add_option("config", config_path, "run config (JSON)")->required();
  sim_cmd->add_option("--trials", trials_override, "override the config's trial count");
  sim_cmd->add_option("--seed", seed_override, "override the config's seed");
  sim_cmd->add_option("--format", format, "csv or json (default: config)")->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--out", out_path, "report path (default: config)");

  std::string log_path;
  std::string replay_format = "text";
  auto* replay_cmd = app.add_subcommand("replay", "replay a court-office event log");
  replay_cmd->add_option("log", log_path, "event log (JSON lines)")->required();
  replay_cmd->add_option("--format", replay_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  replay_cmd->add_option("--out", out_path, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fig2_cmd) {
      const auto r = parse_range(f2_range);
      f2.shards = r;
      f2.majority = parse_majority(f2_majority);
      emit(out_path, [&](std::ostream& o) { fig2(f2, parse_format(format), o); });
    } else if (*fig4_cmd) {
      f4.shards = parse_range(f4_range);
      emit(out_path, [&](std::ostream& o) { fig4(f4, parse_format(format), o); });
    } else if (*claims_cmd) {
      const auto rows = claims(cl);
      emit(out_path, [&](std::ostream& o) { write_claims(rows, parse_format(format), o); });
    } else if (*shards_cmd) {
      sq.model = sq_model == "traditional" ? ShardingModel::kTraditional : ShardingModel::kClassBased;
      sq.majority = parse_majority(sq_majority);
      const auto limit = max_shards_for_target(sq);
      emit(out_path, [&](std::ostream& o) { write_shards(sq, limit, parse_format(format), o); });
    } else if (*sim_cmd) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config '" + config_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + config_path + "': " + e.what());
      }
      if (!trials_override.empty()) doc["trials"] = std::stoull(trials_override);
      if (!seed_override.empty()) doc["seed"] = std::stoull(seed_override);
      auto cfg = parse_run_config(doc, output_dir());
      if (sim_cmd->count("--format")) cfg.format = parse_format(format);
      if (!out_path.empty()) cfg.output_path = resolve(out_path);
      const auto result = simulate(cfg);
      emit(cfg.output_path.string(), [&](std::ostream& o) { write_simulation(result, cfg.format, o); });
      if (!cfg.audit_path.empty()) {
        emit(cfg.audit_path.string(), [&](std::ostream& o) { write_audit(cfg, o); });
      }
    } else if (*replay_cmd) {
      std::ifstream in(log_path);
      if (!in) throw UsageError("cannot read event log '" + log_path + "'");
      const Court court = replay(in);
      emit(out_path, [&](std::ostream& o) { write_replay(court.state(), replay_format == "json", o); });
    }
  } catch (const GuardExceeded& e) {
    std::cerr << "jurybench: " << e.what() << '\n';
    return kExitGuard;
  } catch (const std::invalid_argument& e) {
    std::cerr << "jurybench: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ReplayError& e) {
    std::cerr << "jurybench: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "jurybench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
