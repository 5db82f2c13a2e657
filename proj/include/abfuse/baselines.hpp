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
#include <vector>

#include "abfuse/evaluation.hpp"
#include "abfuse/observation.hpp"

namespace abfuse {

// Modal class per object over the raw predictions. Ties go to the tied class
// with the most confident vote, then to the lower model index of that vote,
// then to the lower class index.
std::map<int, int> majority_vote(const ObservationSet& obs);

// The labels of a single model.
std::map<int, int> model_labels(const ObservationSet& obs, int model);

// Index of the model with the highest F1; ties by accuracy, then lower index.
// Throws InputError for an empty list.
int best_individual(const std::vector<Metrics>& per_model);

// Unweighted mean of every metric.
Metrics average_models(const std::vector<Metrics>& per_model);

}  // namespace abfuse
