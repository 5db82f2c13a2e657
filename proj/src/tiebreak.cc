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

#include "abfuse/tiebreak.hpp"

#include <algorithm>

namespace abfuse {

bool tiebreak_prefers(const LabelCandidate& a, const LabelCandidate& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.model != b.model) return a.model < b.model;
  return a.cls < b.cls;
}

std::map<int, LabelCandidate> apply_tiebreaker(std::span<const LabelCandidate> candidates) {
  int max_object = -1;
  bool dense = true;
  for (const LabelCandidate& c : candidates) {
    if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) {
      throw InputError("tie-breaker candidate confidence outside [0,1]");
    }
    dense &= c.object >= 0;
    max_object = std::max(max_object, c.object);
  }
  std::map<int, LabelCandidate> out;
  if (dense && static_cast<std::size_t>(max_object) <= 4 * candidates.size() + 64) {
    std::vector<int> best(static_cast<std::size_t>(max_object) + 1, -1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      int& b = best[candidates[i].object];
      if (b < 0 || tiebreak_prefers(candidates[i], candidates[b])) b = static_cast<int>(i);
    }
    for (int b : best) {
      if (b >= 0) out.emplace_hint(out.end(), candidates[b].object, candidates[b]);
    }
    return out;
  }
  for (const LabelCandidate& c : candidates) {
    auto [it, inserted] = out.emplace(c.object, c);
    if (!inserted && tiebreak_prefers(c, it->second)) it->second = c;
  }
  return out;
}

std::vector<LabelCandidate> ip_candidates(const IpSolution& solution,
                                          const ObservationSet& surviving) {
  std::map<Atom, LabelCandidate> best;
  for (const Atom& a : solution.assigned) best.emplace(a, LabelCandidate{a.object, a.cls, -1, -1.0});
  for (const Observation& e : surviving.entries()) {
    if (solution.elim[surviving.pair_index(e.model, e.cls)]) continue;
    auto it = best.find(Atom{e.cls, e.object});
    if (it == best.end()) continue;
    const LabelCandidate cand{e.object, e.cls, e.model, e.confidence};
    if (it->second.model < 0 || tiebreak_prefers(cand, it->second)) it->second = cand;
  }
  std::vector<LabelCandidate> out;
  out.reserve(best.size());
  for (const auto& [atom, cand] : best) {
    if (cand.model >= 0) out.push_back(cand);
  }
  return out;
}

std::vector<LabelCandidate> hs_candidates(const HsResult& result) {
  std::vector<LabelCandidate> out;
  out.reserve(result.selected.size());
  for (const Observation& o : result.selected) {
    out.push_back({o.object, o.cls, o.model, o.confidence});
  }
  return out;
}

}  // namespace abfuse
