// Copyright 2026 The abfuse Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"
#include "abfuse/evaluation.hpp"
#include "abfuse/solver_hs.hpp"
#include "abfuse/solver_ip.hpp"
#include "abfuse/tiebreak.hpp"

namespace abfuse {

// Result of one abduction run. `labels` holds one candidate per assigned atom
// without tie-breaking, or one per object with it.
struct AbductionOutput {
  bool feasible = true;
  std::vector<Atom> atoms;
  std::vector<LabelCandidate> labels;
  double inconsistency = 0.0;  // of `atoms`
  double seconds = 0.0;
  std::optional<IpSolution> ip;
  std::optional<HsResult> hs;
};

// EDR filtering at `epsilon`, exact IP at `delta`, optional tie-breaker.
AbductionOutput run_ip(const ObservationSet& raw, const RuleSet& rules, double epsilon,
                       double delta, const Domain& domain, bool tie_break);

// Heuristic search over config.epsilon_set, optional tie-breaker.
AbductionOutput run_hs(const ObservationSet& raw, const RuleSet& rules,
                       const HsConfig& config, const Domain& domain, bool tie_break);

std::vector<LabelCandidate> tiebroken(const std::vector<LabelCandidate>& candidates);

// Atom or label scoring, whichever matches the output.
Metrics score_output(const AbductionOutput& out, const std::vector<int>& gt,
                     bool tie_break);

enum class Method { kIp, kIpTb, kHs, kHsTb, kMv, kBest, kAvg };

std::string to_string(Method m);
Method parse_method(const std::string& text);
std::vector<Method> parse_methods(const std::string& comma_list);
std::vector<double> parse_grid(const std::string& comma_list);

struct SweepInputs {
  ObservationSet train;
  std::vector<int> train_gt;
  ObservationSet test;
  std::vector<int> test_gt;
  Domain domain;
};

struct SweepOptions {
  std::vector<Method> methods = {Method::kIp, Method::kIpTb, Method::kHs, Method::kHsTb,
                                 Method::kMv, Method::kBest, Method::kAvg};
  std::vector<double> delta_grid = kDefaultGrid;
  std::vector<double> epsilon_grid = kDefaultGrid;
  int repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  // HS visits pairs in an order drawn from (seed, repeat).
  bool shuffle_hs_pairs = false;
};

struct SweepCell {
  double delta = 0.0;
  double epsilon = 0.0;
  Method method = Method::kIp;
  bool feasible = true;
  Metrics mean;                    // over repeats
  std::vector<Metrics> per_repeat;
  long long ip_objective = -1;     // IP methods only
};

struct SweepGrid {
  std::vector<double> deltas;
  std::vector<double> epsilons;
  std::vector<SweepCell> cells;  // δ-major, then ε, then method order
};

// Learns rules on the training split over the ε grid unless `rules` is given.
// HS cells use every grid ε up to the cell's ε as the ε set. Infeasible IP
// cells are marked and the sweep continues.
SweepGrid run_sweep(const SweepInputs& inputs, const SweepOptions& options,
                    const RuleSet* rules = nullptr);

// delta,epsilon,method,precision,recall,f1,accuracy,inconsistency,
// runtime_per_object,n_objects,status
void write_sweep_csv(std::ostream& os, const SweepGrid& grid, bool per_repeat = false);

}  // namespace abfuse
