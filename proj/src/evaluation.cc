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

#include "abfuse/evaluation.hpp"

#include <algorithm>

namespace abfuse {

namespace {
int count_ground_truth(const std::vector<int>& gt) {
  return static_cast<int>(std::count_if(gt.begin(), gt.end(), [](int c) { return c >= 0; }));
}
}  // namespace

Metrics score_atoms(std::span<const Atom> atoms, const std::vector<int>& gt) {
  const int n_gt = count_ground_truth(gt);
  if (n_gt == 0) throw InputError("ground truth is empty");

  std::vector<Atom> sorted(atoms.begin(), atoms.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<int> labels_per_object(gt.size(), 0);
  std::vector<char> hit(gt.size(), 0);
  int correct = 0;
  for (const Atom& a : sorted) {
    if (a.object < 0 || a.object >= static_cast<int>(gt.size())) {
      throw InputError("atom references an unknown object");
    }
    ++labels_per_object[a.object];
    if (gt[a.object] == a.cls) {
      ++correct;
      hit[a.object] = 1;
    }
  }
  int covered = 0, exact = 0;
  for (std::size_t o = 0; o < gt.size(); ++o) {
    if (gt[o] < 0) continue;
    covered += hit[o];
    exact += hit[o] && labels_per_object[o] == 1;
  }

  Metrics m;
  m.n_objects = n_gt;
  m.precision = sorted.empty() ? 0.0 : static_cast<double>(correct) / sorted.size();
  m.recall = static_cast<double>(covered) / n_gt;
  m.f1 = harmonic_f1(m.precision, m.recall);
  m.accuracy = static_cast<double>(exact) / n_gt;
  return m;
}

Metrics score_labels(const std::map<int, int>& labels, const std::vector<int>& gt) {
  const int n_gt = count_ground_truth(gt);
  if (n_gt == 0) throw InputError("ground truth is empty");
  int correct = 0;
  for (const auto& [object, cls] : labels) {
    if (object < 0 || object >= static_cast<int>(gt.size())) {
      throw InputError("label references an unknown object");
    }
    correct += gt[object] >= 0 && gt[object] == cls;
  }
  Metrics m;
  m.n_objects = n_gt;
  m.precision = labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();
  m.recall = static_cast<double>(correct) / n_gt;
  m.f1 = harmonic_f1(m.precision, m.recall);
  m.accuracy = m.recall;
  return m;
}

}  // namespace abfuse
