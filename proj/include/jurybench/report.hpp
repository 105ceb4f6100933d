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

#include <ostream>
#include <string>

#include "jurybench/log_prob.hpp"
#include "jurybench/sim.hpp"

namespace jurybench {

using ojson = nlohmann::ordered_json;

/// {"log10": ..., "probability": "...", "exact": "num/den"}; log10 is null for 0.
inline ojson to_json(const LogProb& p) {
  ojson j;
  j["log10"] = p.is_zero() ? ojson(nullptr) : ojson(p.log10());
  j["probability"] = p.scientific();
  if (p.has_exact()) j["exact"] = p.rational_string();
  return j;
}

inline ojson to_json(const Rate& r) {
  return ojson{{"hits", r.hits}, {"rate", r.rate}, {"lo", r.lo}, {"hi", r.hi}};
}

inline ojson to_json(const SystemParams& p) {
  return ojson{{"n", p.nodes},       {"s", p.shards},
               {"m", p.jury_size},   {"T", p.threshold},
               {"AD", p.adversaries}, {"liveness_threshold", p.liveness_threshold()},
               {"epoch_seconds", p.epoch_seconds}, {"block_txs", p.block_txs}};
}

inline ojson to_json(const EpochOutcome& e) {
  return ojson{{"epoch", e.epoch},
               {"seed", e.seed},
               {"per_jury_adversaries", e.per_jury_adversaries},
               {"safety_failures", e.safety_failures},
               {"liveness_failures", e.liveness_failures}};
}

inline ojson to_json(const TrialReport& r) {
  ojson j;
  j["schema_version"] = 1;
  j["params"] = to_json(r.params);
  j["allocation"] = r.allocation.counts;
  j["trials"] = r.trials;
  j["base_seed"] = r.base_seed;
  j["perjury_safety"] = to_json(r.perjury_safety);
  j["system_safety"] = to_json(r.system_safety);
  j["perjury_liveness"] = to_json(r.perjury_liveness);
  j["system_liveness"] = to_json(r.system_liveness);
  ojson analytic;
  analytic["perjury_safety"] = to_json(r.analytic_perjury_safety);
  analytic["perjury_liveness"] = to_json(r.analytic_perjury_liveness);
  analytic["system_safety"] = r.analytic_system_safety ? to_json(*r.analytic_system_safety) : ojson(nullptr);
  analytic["system_liveness"] = r.analytic_system_liveness ? to_json(*r.analytic_system_liveness) : ojson(nullptr);
  j["analytic"] = std::move(analytic);
  if (r.exhaustive) {
    j["exhaustive"] = ojson{{"placements", r.exhaustive->placements.get_str()},
                            {"perjury_safety", to_json(r.exhaustive->perjury_safety)},
                            {"system_safety", to_json(r.exhaustive->system_safety)},
                            {"perjury_liveness", to_json(r.exhaustive->perjury_liveness)},
                            {"system_liveness", to_json(r.exhaustive->system_liveness)}};
  } else {
    j["exhaustive"] = nullptr;
  }
  return j;
}

inline constexpr const char* kTrialCsvHeader =
    "trials,perjury_rate,perjury_lo,perjury_hi,system_rate,system_lo,system_hi,analytic_perjury_log10";

inline void write_csv(std::ostream& out, const TrialReport& r) {
  out << kTrialCsvHeader << '\n'
      << r.trials << ',' << format_sci(r.perjury_safety.rate) << ',' << format_sci(r.perjury_safety.lo) << ','
      << format_sci(r.perjury_safety.hi) << ',' << format_sci(r.system_safety.rate) << ','
      << format_sci(r.system_safety.lo) << ',' << format_sci(r.system_safety.hi) << ','
      << format_sci(r.analytic_perjury_safety.log10()) << '\n';
}

}  // namespace jurybench
