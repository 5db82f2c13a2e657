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

#include <map>
#include <span>
#include <vector>

#include "abfuse/observation.hpp"
#include "abfuse/solver_hs.hpp"
#include "abfuse/solver_ip.hpp"

namespace abfuse {

// A label that survived abduction for one object, with the confidence of the
// model that proposed it.
struct LabelCandidate {
  int object = 0;
  int cls = 0;
  int model = 0;
  double confidence = 0.0;

  friend bool operator==(const LabelCandidate&, const LabelCandidate&) = default;
};

// True when `a` beats `b`: higher confidence, then lower model index, then
// lower class index.
bool tiebreak_prefers(const LabelCandidate& a, const LabelCandidate& b);

// One label per object with at least one candidate; objects without
// candidates are absent.
std::map<int, LabelCandidate> apply_tiebreaker(std::span<const LabelCandidate> candidates);

// Candidates for the IP: every assigned atom joined with its most confident
// accepted, surviving supporting observation.
std::vector<LabelCandidate> ip_candidates(const IpSolution& solution,
                                          const ObservationSet& surviving);

// Candidates for HS: the selected tuples as they are.
std::vector<LabelCandidate> hs_candidates(const HsResult& result);

}  // namespace abfuse
