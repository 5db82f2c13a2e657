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

namespace abfuse {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double inconsistency = 0.0;
  double runtime_per_object = 0.0;  // seconds
  int n_objects = 0;
};

inline double harmonic_f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Scores a set of (class, object) atoms before tie-breaking. `gt` holds the
// true class per object, -1 where unknown.
//   precision = correct atoms / atoms
//   recall    = ground-truth objects with a correct atom / ground-truth objects
//   accuracy  = objects whose atom set is exactly the true class / ground-truth objects
Metrics score_atoms(std::span<const Atom> atoms, const std::vector<int>& gt);

// Scores a single label per object (after tie-breaking).
//   precision = correct labels / labels
//   recall = accuracy = correct labels / ground-truth objects
Metrics score_labels(const std::map<int, int>& labels, const std::vector<int>& gt);

}  // namespace abfuse
