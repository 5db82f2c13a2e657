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
#include <random>
#include <string>
#include <vector>

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"
#include "abfuse/model_io.hpp"
#include "abfuse/solver_ip.hpp"

// Reference implementations and random instance generators shared by the unit
// tests and the acceptance runner. Everything here is written from the problem
// definitions, without calling the library code it checks.
namespace abfuse::oracle {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);

ObservationSet random_observations(Rng& rng, int objects, int models, int classes,
                                   double density);

struct LabeledSet {
  ObservationSet observations;
  std::vector<int> labels;
};

// Objects with a true class; every model reports with probability `density`,
// correctly with a per-model accuracy drawn from [0.4, 0.9]. Confidences of
// correct reports run higher.
LabeledSet random_labeled(Rng& rng, int objects, int models, int classes, double density,
                          const std::vector<double>& model_accuracy = {});

// Random subset of class pairs, non-empty when at least two classes exist.
Domain random_domain(Rng& rng, int classes);

// Random filtered set: each entry of `obs` is moved to `flagged` with
// probability `flag_rate`.
FilteredObservations random_filtering(Rng& rng, const ObservationSet& obs, double flag_rate);

// assign(c, ω) iff some accepted, unflagged f(ω) = c. Triple loop over
// objects, models and classes.
FixpointResult naive_fixpoint(const FilteredObservations& obs, const Hypothesis& h,
                              const Domain& domain);

// Re-derives every variable of the binary program from the solution and checks
// each constraint family. Returns human-readable violations, empty when valid.
std::vector<std::string> audit_ip(const IpInstance& inst, const IpSolution& sol);

// Exhaustive optimum: objective, fewest eliminations, lexicographic Elim.
// Returns objective -1 when infeasible.
struct ExhaustiveOptimum {
  long long objective = -1;
  std::vector<char> elim;
};
ExhaustiveOptimum exhaustive_ip(const IpInstance& inst);

struct MatchedFact {
  std::string object_id;
  std::string model_id;
  std::string class_id;
  double confidence = 0.0;

  friend auto operator<=>(const MatchedFact&, const MatchedFact&) = default;
};

// Straightforward two-stage matcher.
std::vector<MatchedFact> naive_match(const std::vector<GroundTruthObject>& gt,
                                     const std::vector<Detection>& dets,
                                     const std::vector<std::string>& models,
                                     double threshold);

double box_iou(const BoundingBox& a, const BoundingBox& b);

struct GeometricInstance {
  std::vector<std::string> models;
  std::vector<std::string> classes;
  std::vector<GroundTruthObject> gt;
  std::vector<Detection> dets;
};

// Ground-truth boxes with jittered detections, some near-duplicates and
// distractors, across a couple of images.
GeometricInstance random_geometric(Rng& rng, int max_objects);

}  // namespace abfuse::oracle
