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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abfuse/edr.hpp"
#include "abfuse/observation.hpp"

namespace abfuse {

enum class NormalizerMode {
  kPerObject,      // violations / observed objects, clamped to [0,1]
  kPerGroundRule,  // violations / (observed objects × |IC|)
};

// Domain knowledge: the classes and the integrity constraints (unordered
// class pairs that must not label the same object).
struct Domain {
  std::vector<std::string> classes;
  std::vector<std::pair<int, int>> ic_pairs;  // first < second, no duplicates
  NormalizerMode normalizer = NormalizerMode::kPerObject;
  // Count each conflict twice, once per directed ground rule.
  bool directed_ground_rules = false;

  // Default classes used when no domain config is supplied.
  static const std::vector<std::string>& default_classes();

  // Every pair of distinct classes conflicts.
  static Domain all_pairs(std::vector<std::string> classes);

  // Normalises pair order and rejects self-pairs and unknown classes.
  void add_ic(int a, int b);
  bool conflicts(int a, int b) const;
  int num_classes() const { return static_cast<int>(classes.size()); }
};

// accept(f, c) atoms; indexed by ObservationSet::pair_index.
struct Hypothesis {
  int num_models = 0;
  int num_classes = 0;
  std::vector<char> accepted;

  static Hypothesis none(int num_models, int num_classes);
  static Hypothesis all(int num_models, int num_classes);

  bool accepts(int model, int cls) const {
    return accepted[static_cast<std::size_t>(model) * num_classes + cls] != 0;
  }
  void set(int model, int cls, bool value) {
    accepted[static_cast<std::size_t>(model) * num_classes + cls] = value;
  }
  bool subset_of(const Hypothesis& other) const;
};

// A ground IC violation: object ω carries both classes of one IC pair.
struct Violation {
  int object = 0;
  int cls_a = 0;  // cls_a < cls_b
  int cls_b = 0;

  friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct FixpointResult {
  std::vector<Atom> assigned;        // sorted, distinct
  std::vector<Observation> errors;   // error(f, c, ω) atoms
  std::vector<Violation> violated_ic;  // sorted
  int pred = 0;
  double inc = 0.0;

  friend bool operator==(const FixpointResult&, const FixpointResult&) = default;
};

// Ground IC violations among a set of atoms (any order, duplicates allowed).
std::vector<Violation> find_violations(std::span<const Atom> assigned,
                                       const Domain& domain);

// Normalised inconsistency of `violations` unordered conflicts over
// `observed_objects`. Zero observed objects give 0.
double inc_from_violations(long long violations, int observed_objects,
                           const Domain& domain);

// Inc of an atom set.
double count_inc(std::span<const Atom> assigned, const Domain& domain,
                 int observed_objects);

// Largest number of unordered conflicts whose inconsistency stays within δ,
// capped at observed_objects × |IC|.
long long violation_budget(double delta, int observed_objects, const Domain& domain);

inline bool within_delta(double inc, double delta) { return inc <= delta + 1e-12; }

// Stratified evaluation of the program for hypothesis `h`:
//   stratum 1: error atoms (from EDR filtering);
//   stratum 2: assign(c, ω) ← f(ω) = c ∧ accept(f, c) ∧ ¬error(f, c, ω);
//   stratum 3: integrity-constraint check.
FixpointResult fixpoint(const FilteredObservations& obs, const Hypothesis& h,
                        const Domain& domain);

}  // namespace abfuse
