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
#include <filesystem>
#include <string>
#include <vector>

#include "abfuse/observation.hpp"

namespace abfuse {

using Matrix = std::vector<std::vector<double>>;

// Synthetic analog of a multi-condition deployment. Each object is drawn in
// one condition (e.g. a weather type) at that condition's intensity; every
// model has a home condition on which it sees only `home_intensity` of shift.
// A model's confusion at shift s is (1 − s)·I + s·T_f for its target T_f.
struct ShiftScenario {
  std::vector<std::string> classes;
  std::vector<std::string> models;
  std::vector<double> class_prior;  // empty: uniform
  std::vector<std::string> conditions;
  std::vector<int> model_home;       // per model; -1 for none
  // Per-model row-stochastic target confusions. Empty: drawn from the seed.
  std::vector<Matrix> confusion_targets;

  int n_train = 1000;
  int n_test = 1000;
  std::vector<double> train_mixture;    // over conditions; empty: uniform
  std::vector<double> train_intensity;  // per condition
  std::vector<double> test_mixture;
  std::vector<double> test_intensity;
  double home_intensity = 0.05;

  double detect_probability = 1.0;
  double correct_conf_mean = 0.80;
  double correct_conf_sd = 0.10;
  double wrong_conf_mean = 0.50;
  double wrong_conf_sd = 0.15;

  std::uint64_t seed = 0;

  // Throws InputError on malformed vectors or non-stochastic matrices.
  void validate() const;
};

// Named templates. Prefixes follow the mixed-condition test suites: UM (one
// condition dominates), BM (two), MM (most), AM (all), HUM (one, at high
// intensity). A numeric suffix ("UM_2") rotates the dominant condition.
// Models: one "baseline" model plus one specialist per condition.
ShiftScenario preset_scenario(const std::string& name, std::uint64_t seed);

// Scenario in which each model is strong on exactly one condition and the
// test set mixes all conditions.
ShiftScenario heterogeneous_scenario(int num_models, int num_classes, int n_train,
                                     int n_test, std::uint64_t seed);

// (1 − s)·I + s·T.
Matrix interpolate_confusion(const Matrix& target, double intensity);

// The target confusions used for a scenario (configured or seed-drawn).
std::vector<Matrix> resolved_targets(const ShiftScenario& scenario);

struct SyntheticSplit {
  ObservationSet observations;
  std::vector<int> labels;       // ground-truth class per object
  std::vector<int> condition;    // condition per object
};

struct SyntheticDataset {
  SyntheticSplit train;
  SyntheticSplit test;
};

SyntheticDataset generate(const ShiftScenario& scenario);

// Writes `split` as a pre-matched dataset (manifest.json, gt.jsonl and one
// predictions file per model) into `dir`.
void write_split(const SyntheticSplit& split, const std::filesystem::path& dir);

}  // namespace abfuse
