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

#include "abfuse/baselines.hpp"

#include <tuple>

namespace abfuse {

std::map<int, int> majority_vote(const ObservationSet& obs) {
  struct Tally {
    int votes = 0;
    double best_confidence = -1.0;
    int best_model = 0;
  };
  const int nc = obs.num_classes();
  std::map<int, std::vector<Tally>> tallies;
  for (const Observation& e : obs.entries()) {
    auto& per_class = tallies[e.object];
    per_class.resize(nc);
    Tally& t = per_class[e.cls];
    ++t.votes;
    if (e.confidence > t.best_confidence ||
        (e.confidence == t.best_confidence && e.model < t.best_model)) {
      t.best_confidence = e.confidence;
      t.best_model = e.model;
    }
  }
  std::map<int, int> out;
  for (const auto& [object, per_class] : tallies) {
    int winner = -1;
    for (int c = 0; c < nc; ++c) {
      const Tally& t = per_class[c];
      if (t.votes == 0) continue;
      if (winner < 0) {
        winner = c;
        continue;
      }
      const Tally& w = per_class[winner];
      // Larger key wins; the class loop order resolves the final tie.
      if (std::make_tuple(t.votes, t.best_confidence, -t.best_model) >
          std::make_tuple(w.votes, w.best_confidence, -w.best_model)) {
        winner = c;
      }
    }
    out.emplace(object, winner);
  }
  return out;
}

std::map<int, int> model_labels(const ObservationSet& obs, int model) {
  std::map<int, int> out;
  for (const Observation& e : obs.entries()) {
    if (e.model == model) out.emplace(e.object, e.cls);
  }
  return out;
}

int best_individual(const std::vector<Metrics>& per_model) {
  if (per_model.empty()) throw InputError("no models to choose from");
  int best = 0;
  for (int i = 1; i < static_cast<int>(per_model.size()); ++i) {
    const Metrics& m = per_model[i];
    const Metrics& b = per_model[best];
    if (m.f1 > b.f1 || (m.f1 == b.f1 && m.accuracy > b.accuracy)) best = i;
  }
  return best;
}

Metrics average_models(const std::vector<Metrics>& per_model) {
  Metrics avg;
  if (per_model.empty()) return avg;
  const double n = static_cast<double>(per_model.size());
  double objects = 0.0;
  for (const Metrics& m : per_model) {
    avg.precision += m.precision / n;
    avg.recall += m.recall / n;
    avg.f1 += m.f1 / n;
    avg.accuracy += m.accuracy / n;
    avg.inconsistency += m.inconsistency / n;
    avg.runtime_per_object += m.runtime_per_object / n;
    objects += m.n_objects / n;
  }
  avg.n_objects = static_cast<int>(objects + 0.5);
  return avg;
}

}  // namespace abfuse
