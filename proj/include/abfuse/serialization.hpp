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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"
#include "abfuse/evaluation.hpp"
#include "abfuse/solver_hs.hpp"
#include "abfuse/synthgen.hpp"
#include "abfuse/tiebreak.hpp"

namespace abfuse {

// Rule sets: one record per (model, class, ε):
//   {"model_id": ..., "class_id": ..., "epsilon": ..., "conditions": [...]}
void write_rule_set(std::ostream& os, const RuleSet& rules,
                    const std::vector<std::string>& models,
                    const std::vector<std::string>& classes);
RuleSet read_rule_set(const std::filesystem::path& path,
                      const std::vector<std::string>& models,
                      const std::vector<std::string>& classes);

// Domain config:
//   {"classes": [...], "ic_pairs": [["a","b"], ...] | "all",
//    "normalizer_mode": "per_object" | "per_ground_rule",
//    "directed_ground_rules": false}
Domain read_domain(const std::filesystem::path& path);
void write_domain(std::ostream& os, const Domain& domain);
NormalizerMode parse_normalizer(const std::string& text);
std::string to_string(NormalizerMode mode);

// Scenario config: same JSON dialect. Either {"preset": "UM_1", "seed": 3}
// plus optional overrides, or a full field list.
ShiftScenario read_scenario(const std::filesystem::path& path);

// Selection trace: {"model_id", "class_id", "chosen_epsilon" | null, "s_size_after"}.
void write_trace(std::ostream& os, const std::vector<HsStep>& trace,
                 const std::vector<std::string>& models,
                 const std::vector<std::string>& classes);

// Labels: {"object_id", "class_id", "model_id", "confidence"} per line.
void write_labels(std::ostream& os, const std::vector<LabelCandidate>& labels,
                  const ObservationSet& vocabulary);
std::vector<LabelCandidate> read_labels(const std::filesystem::path& path,
                                        const ObservationSet& vocabulary);

void write_metrics(std::ostream& os, const Metrics& m);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace abfuse
