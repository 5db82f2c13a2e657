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
#include <vector>

#include "abfuse/observation.hpp"

namespace abfuse {

// Default ε grid; identical to the δ grid used by the sweeps.
inline const std::vector<double> kDefaultGrid = {0.01, 0.1, 0.2, 0.3, 0.4, 0.5,
                                                 0.6,  0.7, 0.8, 0.9, 1.0};

// A metacognitive cue evaluated on one observation and the other
// observations of the same object.
struct Condition {
  enum class Kind {
    kDisagreeWith,     // peer `model` labels the object with another class
    kConfidenceBelow,  // own confidence < `threshold`
    kClassIs,          // some peer labels the object as `cls`
    kAllOf,            // every child fires
  };

  Kind kind = Kind::kConfidenceBelow;
  int model = -1;
  int cls = -1;
  double threshold = 0.0;
  std::vector<Condition> children;

  static Condition disagree_with(int model);
  static Condition confidence_below(double threshold);
  static Condition class_is(int cls);
  static Condition all_of(std::vector<Condition> children);

  // `siblings` holds every observation of `obs.object` (it may include `obs`).
  bool fires(const Observation& obs, std::span<const Observation> siblings) const;

  friend bool operator==(const Condition&, const Condition&) = default;
};

// Disjunction of conditions for one (model, class): the rule flags an
// observation f(ω) = c as an error when any condition fires.
struct ErrorRule {
  int model = 0;
  int cls = 0;
  std::vector<Condition> conditions;

  bool flags(const Observation& obs, std::span<const Observation> siblings) const;
};

// Learned rules for every (model, class) at every grid ε.
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(int num_models, int num_classes, std::vector<double> epsilon_grid);

  const std::vector<double>& epsilon_grid() const { return grid_; }
  int num_models() const { return num_models_; }
  int num_classes() const { return num_classes_; }

  // Throws InputError when `epsilon` is not on the grid.
  int epsilon_index(double epsilon) const;

  const ErrorRule& rule(int model, int cls, int eps_index) const;
  ErrorRule& rule(int model, int cls, int eps_index);
  const ErrorRule& rule_at(int model, int cls, double epsilon) const {
    return rule(model, cls, epsilon_index(epsilon));
  }

  // A rule set that flags nothing.
  static RuleSet empty(int num_models, int num_classes,
                       std::vector<double> epsilon_grid);

 private:
  int num_models_ = 0;
  int num_classes_ = 0;
  std::vector<double> grid_;
  std::vector<ErrorRule> rules_;  // [eps][model][class]
};

// Ordered candidate conditions for every (model, class), indexed by
// ObservationSet::pair_index.
using CandidatePool = std::vector<std::vector<Condition>>;

// Quantile levels for the confidence thresholds.
inline const std::vector<double> kConfidenceQuantiles = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                         0.6, 0.7, 0.8, 0.9};

// For each (f, c): disagree_with(g) for every g != f in model order, then
// confidence_below(t) for the distinct quantiles t of f's training confidences
// in ascending order.
CandidatePool generate_candidates(const ObservationSet& train);

// Per-(f, c) training statistics of one rule.
struct RuleStats {
  int support = 0;          // training observations f(ω) = c
  int correct = 0;          // ... whose ground truth is c
  int flagged = 0;
  int flagged_correct = 0;  // correct observations the rule sacrifices
  int flagged_wrong = 0;

  double recall_reduction() const {
    return correct == 0 ? 0.0 : static_cast<double>(flagged_correct) / correct;
  }
};

RuleStats rule_stats(const ErrorRule& rule, const ObservationSet& train,
                     const std::vector<int>& gt_labels);

// Greedy precision-first learner run independently for one ε. Each step adds
// the qualifying candidate with the highest standalone error-detection
// precision (ties to the earlier candidate). A candidate qualifies when it
// flags at least one additional wrong observation and keeps the fraction of
// flagged correct observations at or below ε. Result is indexed by
// ObservationSet::pair_index.
std::vector<ErrorRule> learn_rules(const ObservationSet& train,
                                   const std::vector<int>& gt_labels,
                                   const CandidatePool& candidates,
                                   double epsilon);

// Learns every grid ε in ascending order, each rule warm-started from the
// rule of the previous grid point, so rules are nested across ε.
RuleSet learn_rule_set(const ObservationSet& train,
                       const std::vector<int>& gt_labels,
                       const CandidatePool& candidates,
                       std::vector<double> epsilon_grid);

// Observations split by the rules at one ε. `flagged` are the error(f, c, ω)
// atoms. Conditions see siblings from the input set.
struct FilteredObservations {
  ObservationSet surviving;
  std::vector<Observation> flagged;

  // Objects observed before filtering.
  int num_observed_objects() const;
};

FilteredObservations apply_rules(const ObservationSet& obs, const RuleSet& rules,
                                 double epsilon);

// Same, with explicitly supplied per-pair rules (pair_index order).
FilteredObservations apply_rules(const ObservationSet& obs,
                                 std::span<const ErrorRule> rules);

}  // namespace abfuse
