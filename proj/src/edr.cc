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

#include "abfuse/edr.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace abfuse {

// ---------------------------------------------------------------------------
// Conditions

Condition Condition::disagree_with(int model) {
  Condition c;
  c.kind = Kind::kDisagreeWith;
  c.model = model;
  return c;
}

Condition Condition::confidence_below(double threshold) {
  Condition c;
  c.kind = Kind::kConfidenceBelow;
  c.threshold = threshold;
  return c;
}

Condition Condition::class_is(int cls) {
  Condition c;
  c.kind = Kind::kClassIs;
  c.cls = cls;
  return c;
}

Condition Condition::all_of(std::vector<Condition> children) {
  Condition c;
  c.kind = Kind::kAllOf;
  c.children = std::move(children);
  return c;
}

bool Condition::fires(const Observation& obs,
                      std::span<const Observation> siblings) const {
  switch (kind) {
    case Kind::kDisagreeWith:
      for (const Observation& s : siblings) {
        if (s.model == model && s.model != obs.model) return s.cls != obs.cls;
      }
      return false;
    case Kind::kConfidenceBelow:
      return obs.confidence < threshold;
    case Kind::kClassIs:
      for (const Observation& s : siblings) {
        if (s.model != obs.model && s.cls == cls) return true;
      }
      return false;
    case Kind::kAllOf:
      if (children.empty()) return false;
      for (const Condition& c : children) {
        if (!c.fires(obs, siblings)) return false;
      }
      return true;
  }
  return false;
}

bool ErrorRule::flags(const Observation& obs,
                      std::span<const Observation> siblings) const {
  if (obs.model != model || obs.cls != cls) return false;
  for (const Condition& c : conditions) {
    if (c.fires(obs, siblings)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// RuleSet

RuleSet::RuleSet(int num_models, int num_classes, std::vector<double> epsilon_grid)
    : num_models_(num_models), num_classes_(num_classes), grid_(std::move(epsilon_grid)) {
  if (grid_.empty()) throw InputError("epsilon grid is empty");
  for (double e : grid_) {
    if (!(e >= 0.0 && e <= 1.0)) throw InputError("epsilon outside [0,1]");
  }
  rules_.resize(grid_.size() * num_models_ * num_classes_);
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    for (int f = 0; f < num_models_; ++f) {
      for (int c = 0; c < num_classes_; ++c) {
        rule(f, c, static_cast<int>(k)).model = f;
        rule(f, c, static_cast<int>(k)).cls = c;
      }
    }
  }
}

int RuleSet::epsilon_index(double epsilon) const {
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (std::abs(grid_[k] - epsilon) < 1e-9) return static_cast<int>(k);
  }
  throw InputError("epsilon " + std::to_string(epsilon) + " is not on the rule grid");
}

const ErrorRule& RuleSet::rule(int model, int cls, int eps_index) const {
  return rules_[(static_cast<std::size_t>(eps_index) * num_models_ + model) * num_classes_ + cls];
}

ErrorRule& RuleSet::rule(int model, int cls, int eps_index) {
  return rules_[(static_cast<std::size_t>(eps_index) * num_models_ + model) * num_classes_ + cls];
}

RuleSet RuleSet::empty(int num_models, int num_classes,
                       std::vector<double> epsilon_grid) {
  return RuleSet(num_models, num_classes, std::move(epsilon_grid));
}

// ---------------------------------------------------------------------------
// Candidates

CandidatePool generate_candidates(const ObservationSet& train) {
  const int nf = train.num_models();
  const int nc = train.num_classes();
  std::vector<std::vector<double>> confidences(nf);
  for (const Observation& e : train.entries()) confidences[e.model].push_back(e.confidence);

  CandidatePool pool(static_cast<std::size_t>(nf) * nc);
  for (int f = 0; f < nf; ++f) {
    std::vector<double>& conf = confidences[f];
    std::sort(conf.begin(), conf.end());
    std::vector<double> thresholds;
    if (!conf.empty()) {
      for (double q : kConfidenceQuantiles) {
        // Nearest-rank quantile.
        auto rank = static_cast<std::size_t>(std::ceil(q * conf.size()));
        thresholds.push_back(conf[std::max<std::size_t>(rank, 1) - 1]);
      }
      std::sort(thresholds.begin(), thresholds.end());
      thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    }
    for (int c = 0; c < nc; ++c) {
      auto& list = pool[train.pair_index(f, c)];
      for (int g = 0; g < nf; ++g) {
        if (g != f) list.push_back(Condition::disagree_with(g));
      }
      for (double t : thresholds) list.push_back(Condition::confidence_below(t));
    }
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Learning

namespace {

// Training observations of one (f, c) with precomputed firing patterns.
struct PairTable {
  std::vector<char> correct;             // per observation
  std::vector<std::vector<char>> fires;  // per candidate, per observation
  int num_correct = 0;
};

std::vector<PairTable> build_tables(const ObservationSet& train,
                                    const std::vector<int>& gt_labels,
                                    const CandidatePool& candidates) {
  if (static_cast<int>(gt_labels.size()) != train.num_objects()) {
    throw InputError("ground-truth labels do not cover the training objects");
  }
  if (static_cast<int>(candidates.size()) != train.num_pairs()) {
    throw InputError("candidate pool does not match the training vocabulary");
  }
  const auto by_object = train.entries_by_object();
  const auto& entries = train.entries();
  std::vector<std::vector<Observation>> siblings(train.num_objects());
  for (int o = 0; o < train.num_objects(); ++o) {
    for (int i : by_object[o]) siblings[o].push_back(entries[i]);
  }

  std::vector<std::vector<int>> members(train.num_pairs());
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    members[train.pair_index(entries[i].model, entries[i].cls)].push_back(i);
  }

  std::vector<PairTable> tables(train.num_pairs());
  for (int p = 0; p < train.num_pairs(); ++p) {
    PairTable& t = tables[p];
    for (int i : members[p]) {
      const int truth = gt_labels[entries[i].object];
      if (truth < 0) throw InputError("training object without ground truth: " + train.objects()[entries[i].object]);
      t.correct.push_back(truth == entries[i].cls);
      t.num_correct += t.correct.back();
    }
    for (const Condition& cond : candidates[p]) {
      std::vector<char> f;
      f.reserve(members[p].size());
      for (int i : members[p]) f.push_back(cond.fires(entries[i], siblings[entries[i].object]));
      t.fires.push_back(std::move(f));
    }
  }
  return tables;
}

bool within_budget(int flagged_correct, int num_correct, double epsilon) {
  if (num_correct == 0) return true;
  return static_cast<double>(flagged_correct) <= epsilon * num_correct + 1e-9;
}

// Extends `selected` (candidate indices) greedily under budget `epsilon`.
void extend_greedy(const PairTable& t, double epsilon, std::vector<int>& selected) {
  const std::size_t n = t.correct.size();
  std::vector<char> flagged(n, 0);
  for (int k : selected) {
    for (std::size_t i = 0; i < n; ++i) flagged[i] |= t.fires[k][i];
  }
  std::vector<char> used(t.fires.size(), 0);
  for (int k : selected) used[k] = 1;

  while (true) {
    int best = -1;
    double best_precision = -1.0;
    for (std::size_t k = 0; k < t.fires.size(); ++k) {
      if (used[k]) continue;
      int fires = 0, wrong = 0, new_wrong = 0, union_correct = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool fire = t.fires[k][i];
        fires += fire;
        wrong += fire && !t.correct[i];
        new_wrong += fire && !flagged[i] && !t.correct[i];
        union_correct += (fire || flagged[i]) && t.correct[i];
      }
      if (new_wrong == 0 || !within_budget(union_correct, t.num_correct, epsilon)) continue;
      const double precision = static_cast<double>(wrong) / fires;
      if (precision > best_precision) {
        best_precision = precision;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) return;
    used[best] = 1;
    selected.push_back(best);
    for (std::size_t i = 0; i < n; ++i) flagged[i] |= t.fires[best][i];
  }
}

}  // namespace

RuleStats rule_stats(const ErrorRule& rule, const ObservationSet& train,
                     const std::vector<int>& gt_labels) {
  const auto by_object = train.entries_by_object();
  const auto& entries = train.entries();
  RuleStats s;
  std::vector<Observation> sib;
  for (const Observation& e : entries) {
    if (e.model != rule.model || e.cls != rule.cls) continue;
    sib.clear();
    for (int i : by_object[e.object]) sib.push_back(entries[i]);
    const bool correct = gt_labels[e.object] == e.cls;
    const bool flagged = rule.flags(e, sib);
    ++s.support;
    s.correct += correct;
    s.flagged += flagged;
    s.flagged_correct += flagged && correct;
    s.flagged_wrong += flagged && !correct;
  }
  return s;
}

std::vector<ErrorRule> learn_rules(const ObservationSet& train,
                                   const std::vector<int>& gt_labels,
                                   const CandidatePool& candidates,
                                   double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon outside [0,1]");
  const auto tables = build_tables(train, gt_labels, candidates);
  std::vector<ErrorRule> rules(train.num_pairs());
  for (int f = 0; f < train.num_models(); ++f) {
    for (int c = 0; c < train.num_classes(); ++c) {
      const int p = train.pair_index(f, c);
      std::vector<int> selected;
      extend_greedy(tables[p], epsilon, selected);
      rules[p].model = f;
      rules[p].cls = c;
      for (int k : selected) rules[p].conditions.push_back(candidates[p][k]);
    }
  }
  return rules;
}

RuleSet learn_rule_set(const ObservationSet& train,
                       const std::vector<int>& gt_labels,
                       const CandidatePool& candidates,
                       std::vector<double> epsilon_grid) {
  std::sort(epsilon_grid.begin(), epsilon_grid.end());
  epsilon_grid.erase(std::unique(epsilon_grid.begin(), epsilon_grid.end()), epsilon_grid.end());
  RuleSet set(train.num_models(), train.num_classes(), epsilon_grid);
  const auto tables = build_tables(train, gt_labels, candidates);
  for (int f = 0; f < train.num_models(); ++f) {
    for (int c = 0; c < train.num_classes(); ++c) {
      const int p = train.pair_index(f, c);
      std::vector<int> selected;
      for (std::size_t k = 0; k < epsilon_grid.size(); ++k) {
        extend_greedy(tables[p], epsilon_grid[k], selected);
        ErrorRule& r = set.rule(f, c, static_cast<int>(k));
        r.conditions.clear();
        for (int idx : selected) r.conditions.push_back(candidates[p][idx]);
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Application

int FilteredObservations::num_observed_objects() const {
  std::vector<char> seen(surviving.num_objects(), 0);
  for (const Observation& e : surviving.entries()) seen[e.object] = 1;
  for (const Observation& e : flagged) seen[e.object] = 1;
  return static_cast<int>(std::count(seen.begin(), seen.end(), 1));
}

FilteredObservations apply_rules(const ObservationSet& obs,
                                 std::span<const ErrorRule> rules) {
  if (static_cast<int>(rules.size()) != obs.num_pairs()) {
    throw InputError("rule table does not match the observation vocabulary");
  }
  const auto by_object = obs.entries_by_object();
  const auto& entries = obs.entries();
  std::vector<Observation> keep;
  std::vector<Observation> flagged;
  std::vector<Observation> sib;
  for (const Observation& e : entries) {
    sib.clear();
    for (int i : by_object[e.object]) sib.push_back(entries[i]);
    if (rules[obs.pair_index(e.model, e.cls)].flags(e, sib)) {
      flagged.push_back(e);
    } else {
      keep.push_back(e);
    }
  }
  return {obs.with_entries(std::move(keep)), std::move(flagged)};
}

FilteredObservations apply_rules(const ObservationSet& obs, const RuleSet& rules,
                                 double epsilon) {
  if (rules.num_models() != obs.num_models() || rules.num_classes() != obs.num_classes()) {
    throw InputError("rule set does not match the observation vocabulary");
  }
  const int k = rules.epsilon_index(epsilon);
  std::vector<ErrorRule> table;
  table.reserve(obs.num_pairs());
  for (int f = 0; f < obs.num_models(); ++f) {
    for (int c = 0; c < obs.num_classes(); ++c) table.push_back(rules.rule(f, c, k));
  }
  return apply_rules(obs, table);
}

}  // namespace abfuse
