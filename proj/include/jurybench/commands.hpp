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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jurybench/analytics.hpp"
#include "jurybench/event_log.hpp"
#include "jurybench/report.hpp"
#include "jurybench/sim.hpp"

// Implementations behind the jurybench subcommands. Each writes to a stream
// so the tool and the tests share one code path.

namespace jurybench::commands {

/// Bad flags, ranges or config documents. Maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Format { kCsv, kJson };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  throw UsageError("format must be csv or json, got '" + s + "'");
}

struct Range {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// "a:b" (inclusive) or a single "a".
inline Range parse_range(const std::string& text) {
  auto number = [&](const std::string& part) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || part.front() == '-') {
      throw UsageError("invalid range '" + text + "', expected N or LO:HI");
    }
    return static_cast<std::uint64_t>(v);
  };
  const auto colon = text.find(':');
  Range r;
  if (colon == std::string::npos) {
    r.lo = r.hi = number(text);
  } else {
    r.lo = number(text.substr(0, colon));
    r.hi = number(text.substr(colon + 1));
  }
  if (r.lo < 1 || r.lo > r.hi) throw UsageError("invalid range '" + text + "', need 1 <= LO <= HI");
  return r;
}

// ---------------------------------------------------------------------------
// fig2: single-class committee failure versus shard count
// ---------------------------------------------------------------------------

struct Fig2Options {
  std::uint64_t nodes = 2000;
  std::vector<std::uint64_t> adversaries = {666, 1000};
  Range shards{2, 34};
  MajorityRule majority = MajorityRule::kCeil;
};

inline void fig2(const Fig2Options& o, Format format, std::ostream& out) {
  if (o.adversaries.empty()) throw UsageError("fig2 needs at least one --t value");
  if (o.shards.hi > o.nodes) throw UsageError("shard range exceeds n");
  for (const auto t : o.adversaries) {
    if (t > o.nodes) throw UsageError("t = " + std::to_string(t) + " exceeds n");
  }
  ojson rows = ojson::array();
  if (format == Format::kCsv) out << "t,s,m,log10_failure,probability,threshold\n";
  for (const auto t : o.adversaries) {
    for (std::uint64_t s = o.shards.lo; s <= o.shards.hi; ++s) {
      const std::uint64_t m = o.nodes / s;
      const std::uint64_t x = majority_threshold(m, o.majority);
      const LogProb p = hypergeom_tail(o.nodes, t, m, x);
      if (format == Format::kCsv) {
        out << t << ',' << s << ',' << m << ',' << format_sci(p.log10()) << ',' << p.scientific() << ',' << x << '\n';
      } else {
        rows.push_back(ojson{{"t", t}, {"s", s}, {"m", m}, {"threshold", x}, {"failure", to_json(p)}});
      }
    }
  }
  if (format == Format::kJson) out << rows.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// fig4: class-based maximum manipulation probability versus shard count
// ---------------------------------------------------------------------------

struct Fig4Options {
  std::uint64_t nodes = 2000;
  std::uint64_t adversaries = 1000;
  double threshold_fraction = 0.7;
  Range shards{2, 600};
};

inline void fig4(const Fig4Options& o, Format format, std::ostream& out) {
  if (o.shards.hi > o.nodes) throw UsageError("shard range exceeds n");
  if (o.adversaries > o.nodes) throw UsageError("AD exceeds n");
  ojson rows = ojson::array();
  if (format == Format::kCsv) out << "s,m,T,log10_exact,log10_approx,probability,overflow\n";
  for (std::uint64_t s = o.shards.lo; s <= o.shards.hi; ++s) {
    const std::uint64_t m = o.nodes / s;
    const std::uint64_t t = threshold_from_fraction(o.threshold_fraction, m);
    const auto params = SystemParams::from_nodes(o.nodes, s, t, o.adversaries);
    bool overflow = false;
    const auto alloc = clamped_allocation(params.adversaries, t, m, s, &overflow);
    const LogProb exact = manipulation_prob(alloc, s, t);
    // (AD / (T*s))^T, capped at 1 once the adversary overflows the front T.
    const mpq_class base(mpz_class(static_cast<unsigned long>(std::min(o.adversaries, t * s))),
                         mpz_class(static_cast<unsigned long>(t * s)));
    mpq_class approx_q;
    mpz_pow_ui(approx_q.get_num_mpz_t(), base.get_num_mpz_t(), t);
    mpz_pow_ui(approx_q.get_den_mpz_t(), base.get_den_mpz_t(), t);
    const LogProb approx = LogProb::from_rational(approx_q);
    if (format == Format::kCsv) {
      out << s << ',' << m << ',' << t << ',' << format_sci(exact.log10()) << ',' << format_sci(approx.log10()) << ','
          << exact.scientific() << ',' << (overflow ? 1 : 0) << '\n';
    } else {
      rows.push_back(ojson{{"s", s},
                           {"m", m},
                           {"T", t},
                           {"exact", to_json(exact)},
                           {"approximation_log10", approx.is_zero() ? ojson(nullptr) : ojson(approx.log10())},
                           {"overflow", overflow}});
    }
  }
  if (format == Format::kJson) out << rows.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// claims: the headline numbers recomputed
// ---------------------------------------------------------------------------

struct ClaimsOptions {
  std::uint64_t nodes = 2000;
  std::uint64_t traditional_adversaries = 666;
  std::uint64_t adversaries = 1000;
  double threshold_fraction = 0.7;
  std::uint64_t shards = 10;
  double target = 1e-6;
  std::uint64_t block_txs = 1000;

  bool is_reference() const {
    const ClaimsOptions ref;
    return nodes == ref.nodes && traditional_adversaries == ref.traditional_adversaries &&
           adversaries == ref.adversaries && threshold_fraction == ref.threshold_fraction && shards == ref.shards &&
           target == ref.target && block_txs == ref.block_txs;
  }
};

struct ClaimRow {
  std::string name;
  std::string bound;     // the published bound
  std::string computed;  // this implementation's value
  double value = 0.0;
  std::optional<bool> pass;  // only judged at the reference parameters
};

inline std::vector<ClaimRow> claims(const ClaimsOptions& o) {
  const bool judge = o.is_reference();
  std::vector<ClaimRow> rows;
  auto add = [&](std::string name, std::string bound, double value, std::string computed, bool ok) {
    rows.push_back({std::move(name), std::move(bound), std::move(computed), value,
                    judge ? std::optional<bool>(ok) : std::nullopt});
  };
  const double half_hour = 1800.0;
  const double ten_minutes = 600.0;

  const mpq_class target_q(o.target);
  const auto target = LogProb::from_rational(target_q);
  const double years = time_to_fail(target, half_hour).value_or(INFINITY);
  add("time_to_fail_at_target_30min_years", "> 57", years, format_sci(years), years > 57.0);

  ShardQuery trad;
  trad.nodes = o.nodes;
  trad.adversaries = o.traditional_adversaries;
  trad.model = ShardingModel::kTraditional;
  trad.target = o.target;
  const auto trad_limit = max_shards_for_target(trad);
  add("traditional_max_shards", "10 (+-2)", static_cast<double>(trad_limit.shards), std::to_string(trad_limit.shards),
      trad_limit.status == ShardLimit::Status::kLimited && trad_limit.shards >= 8 && trad_limit.shards <= 12);

  const double tph = throughput(o.shards, o.block_txs, half_hour);
  add("throughput_30min_tx_per_hour", ">= 20000", tph, format_sci(tph), tph >= 20000.0);

  ShardQuery cls;
  cls.nodes = o.nodes;
  cls.adversaries = o.adversaries;
  cls.threshold_fraction = o.threshold_fraction;
  const LogProb failure = per_jury_failure(cls, o.shards);
  add("class_failure_at_shards", "< 1e-20", failure.value(), failure.scientific(),
      failure < LogProb::from_rational(mpq_class(1, mpz_class("100000000000000000000"))));

  cls.target = o.target;
  const auto cls_limit = max_shards_for_target(cls);
  add("class_max_shards", "33 (+-2)", static_cast<double>(cls_limit.shards), std::to_string(cls_limit.shards),
      cls_limit.status == ShardLimit::Status::kLimited && cls_limit.shards >= 31 && cls_limit.shards <= 35);

  const auto slow = time_to_fail(failure, half_hour);
  const double slow_years = slow.value_or(INFINITY);
  add("class_time_to_fail_30min_years", "> 1e15", slow_years, format_sci(slow_years), slow_years > 1e15);
  const auto fast = time_to_fail(failure, ten_minutes);
  const double fast_years = fast.value_or(INFINITY);
  add("class_time_to_fail_10min_years", "> 1e14", fast_years, format_sci(fast_years), fast_years > 1e14);
  return rows;
}

inline void write_claims(const std::vector<ClaimRow>& rows, Format format, std::ostream& out) {
  auto status = [](const ClaimRow& r) -> std::string { return r.pass ? (*r.pass ? "pass" : "fail") : "n/a"; };
  if (format == Format::kCsv) {
    out << "claim,bound,computed,status\n";
    for (const auto& r : rows) out << r.name << ',' << r.bound << ',' << r.computed << ',' << status(r) << '\n';
    return;
  }
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    arr.push_back(ojson{{"claim", r.name}, {"bound", r.bound}, {"computed", r.computed}, {"status", status(r)}});
  }
  out << arr.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// shards: wrapper over max_shards_for_target
// ---------------------------------------------------------------------------

inline void write_shards(const ShardQuery& q, const ShardLimit& r, Format format, std::ostream& out) {
  const char* status = "limited";
  switch (r.status) {
    case ShardLimit::Status::kLimited: status = "limited"; break;
    case ShardLimit::Status::kUnbounded: status = "unbounded"; break;
    case ShardLimit::Status::kNotAchievable: status = "not_achievable"; break;
    case ShardLimit::Status::kWholeRange: status = "whole_range"; break;
  }
  const char* model = q.model == ShardingModel::kTraditional ? "traditional" : "class";
  auto prob = [](const std::optional<LogProb>& p) { return p ? p->scientific() : std::string(); };
  if (format == Format::kCsv) {
    out << "model,n,ad,target,status,shards,failure_at_shards,failure_beyond\n"
        << model << ',' << q.nodes << ',' << q.adversaries << ',' << format_sci(q.target) << ',' << status << ','
        << r.shards << ',' << prob(r.at_limit) << ',' << prob(r.beyond_limit) << '\n';
    return;
  }
  ojson j{{"model", model}, {"n", q.nodes}, {"ad", q.adversaries}, {"target", q.target},
          {"status", status}, {"shards", r.shards}};
  j["failure_at_shards"] = r.at_limit ? to_json(*r.at_limit) : ojson(nullptr);
  j["failure_beyond"] = r.beyond_limit ? to_json(*r.beyond_limit) : ojson(nullptr);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulate: config-driven Monte Carlo
// ---------------------------------------------------------------------------

inline constexpr int kConfigSchemaVersion = 1;

struct RunConfig {
  SystemParams params;
  AdversaryStrategy strategy = OptimalFrontT{};
  std::uint64_t trials = 0;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  double exhaustive_guard = 1e7;
  bool require_exhaustive = false;  // guard violations become errors instead of a skipped oracle
  std::optional<std::uint64_t> long_run_epochs;
  std::filesystem::path output_path;
  Format format = Format::kJson;
  std::filesystem::path audit_path;  // optional line-delimited EpochOutcome stream
};

/// Parses and validates a run config document; relative paths resolve
/// against `output_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& output_dir = {}) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw UsageError(std::string("config: missing '") + key + "'");
    return j.at(key);
  };
  RunConfig c;
  try {
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    if (need("schema_version").get<int>() != kConfigSchemaVersion) {
      throw UsageError("config: unsupported schema_version");
    }
    const auto s = need("shards").get<std::uint64_t>();
    const auto m = need("jury_size").get<std::uint64_t>();
    std::uint64_t t = 0;
    if (j.contains("threshold")) {
      t = j.at("threshold").get<std::uint64_t>();
    } else if (j.contains("threshold_fraction")) {
      t = threshold_from_fraction(j.at("threshold_fraction").get<double>(), m);
    } else {
      throw UsageError("config: need 'threshold' or 'threshold_fraction'");
    }
    c.params.shards = s;
    c.params.jury_size = m;
    c.params.nodes = j.value("nodes", s * m);
    c.params.threshold = t;
    c.params.adversaries = need("adversaries").get<std::uint64_t>();
    c.params.epoch_seconds = j.value("epoch_seconds", 1800.0);
    c.params.block_txs = j.value("block_txs", std::uint64_t{1000});
    c.params.validate();

    const auto& strategy = j.contains("strategy") ? j.at("strategy") : nlohmann::json("optimal_front_t");
    if (strategy.is_string() && strategy.get<std::string>() == "optimal_front_t") {
      c.strategy = OptimalFrontT{};
    } else if (strategy.is_string() && strategy.get<std::string>() == "uniform_spread") {
      c.strategy = UniformSpread{};
    } else if (strategy.is_object() && strategy.contains("custom")) {
      c.strategy = CustomAllocation{{strategy.at("custom").get<std::vector<std::uint64_t>>()}};
    } else {
      throw UsageError("config: strategy must be optimal_front_t, uniform_spread or {\"custom\": [...]}");
    }
    resolve_allocation(c.params, c.strategy);

    c.trials = need("trials").get<std::uint64_t>();
    if (c.trials < 1) throw UsageError("config: trials must be >= 1");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (!c.seed) throw UsageError("config: 'seed' is required for stochastic runs");
    c.threads = j.value("threads", 1u);
    if (c.threads < 1) throw UsageError("config: threads must be >= 1");
    c.exhaustive_guard = j.value("exhaustive_guard", 1e7);
    c.require_exhaustive = j.value("require_exhaustive", false);
    if (j.contains("long_run_epochs")) c.long_run_epochs = j.at("long_run_epochs").get<std::uint64_t>();
    if (c.long_run_epochs && *c.long_run_epochs < 1) throw UsageError("config: long_run_epochs must be >= 1");

    const auto& output = need("output");
    c.format = parse_format(output.value("format", std::string("json")));
    c.output_path = output_dir / output.at("path").get<std::string>();
    if (j.contains("audit_path")) c.audit_path = output_dir / j.at("audit_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

struct SimulationResult {
  TrialReport report;
  std::optional<LongRunStats> long_run;
};

inline SimulationResult simulate(const RunConfig& c) {
  SimulationResult r;
  std::optional<ExhaustiveResult> exact;
  try {
    exact = exhaustive(c.params, resolve_allocation(c.params, c.strategy), c.exhaustive_guard);
  } catch (const GuardExceeded&) {
    if (c.require_exhaustive) throw;
  }
  r.report = monte_carlo(c.params, c.strategy, c.trials, *c.seed, c.threads);
  r.report.exhaustive = std::move(exact);
  if (c.long_run_epochs) r.long_run = long_run(c.params, c.strategy, *c.long_run_epochs, *c.seed);
  return r;
}

inline void write_simulation(const SimulationResult& r, Format format, std::ostream& out) {
  if (format == Format::kCsv) {
    write_csv(out, r.report);
    return;
  }
  auto j = to_json(r.report);
  if (r.long_run) {
    const auto& lr = *r.long_run;
    j["long_run"] = ojson{{"epochs", lr.epochs},
                          {"failures", lr.failures},
                          {"mean_first_failure", lr.mean_first_failure ? ojson(*lr.mean_first_failure) : ojson()},
                          {"censored_epochs", lr.censored_epochs}};
  }
  out << j.dump(2) << '\n';
}

/// Re-derives every trial's epoch with the seeds monte_carlo used.
inline void write_audit(const RunConfig& c, std::ostream& out) {
  for (std::uint64_t i = 0; i < c.trials; ++i) {
    out << to_json(assign_epoch(c.params, c.strategy, derive_seed(*c.seed, i), i)).dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

inline void write_replay(const CourtState& s, bool as_json, std::ostream& out) {
  if (as_json) {
    out << dump_state(s).dump(2) << '\n';
    return;
  }
  for (const auto& a : s.admission_history) {
    out << "admission at seq " << a.seq << " (epoch " << a.epoch << ", batch " << a.batch << "): "
        << join(a.lengths_before) << " -> " << join(a.lengths_after) << '\n';
  }
  out << "epoch " << s.epoch << ", window " << s.window << ", juries " << s.juries() << '\n';
  out << "queue lengths " << join(s.queue_lengths()) << '\n';
  for (std::size_t occ = 0; occ < s.queues.size(); ++occ) {
    out << "pending[" << occ << "]:";
    for (const auto& e : s.queues[occ]) out << ' ' << e.node.value;
    out << '\n';
  }
  for (std::size_t occ = 0; occ < s.grid.size(); ++occ) {
    out << "grid[" << occ << "]:";
    for (const auto& cell : s.grid[occ]) out << ' ' << (cell ? cell->value : std::string("_"));
    out << '\n';
  }
  const auto weak = s.under_strength_juries();
  if (!weak.empty()) out << "under-strength juries " << join(weak) << '\n';
}

}  // namespace jurybench::commands
