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
#include <optional>
#include <span>
#include <vector>

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"
#include "abfuse/observation.hpp"

namespace abfuse {

struct HsConfig {
  double delta = 0.1;
  std::vector<double> epsilon_set = kDefaultGrid;
  // Visit (f, c) pairs in a seeded random order instead of (model, class).
  bool shuffle_pairs = false;
  std::uint64_t seed = 0;

  // Throws InputError on an empty ε set or values outside [0,1].
  void validate() const;
};

struct HsStep {
  int model = 0;
  int cls = 0;
  std::optional<double> chosen_epsilon;
  int added = 0;
  int size_after = 0;  // |S_final| after this step
  double inc_after = 0.0;
};

struct HsResult {
  std::vector<Observation> selected;  // S_final, in insertion order
  std::vector<HsStep> trace;

  std::vector<Atom> atoms() const;  // distinct (class, object), sorted
};

// Observations of model f for class c that the (f, c, ε) rule does not flag.
std::vector<Observation> get_filtered_preds(int model, int cls, double epsilon,
                                            const ObservationSet& raw,
                                            const RuleSet& rules);

// Inconsistency of the atoms induced by `s`, normalised over the objects
// observed in the raw input.
double calc_incon(std::span<const Observation> s, const Domain& domain,
                  int observed_objects);

// Greedy selection over (f, c) pairs: for each pair the ε-filtered prediction
// set that most enlarges S_final while keeping its inconsistency within δ is
// added (strict improvement only; equal sizes keep the smaller ε).
HsResult heuristic_search(const ObservationSet& raw, const HsConfig& config,
                          const RuleSet& rules, const Domain& domain);

// The (f, c) visiting order used by heuristic_search.
std::vector<ModelClass> pair_order(int num_models, int num_classes,
                                   const HsConfig& config);

}  // namespace abfuse
