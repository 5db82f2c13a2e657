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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace abfuse {

// Raised for malformed or inconsistent user input (files, flags, configs).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One model's class prediction for one object: the fact f(ω) = c together
// with the model's confidence. Indices refer to the owning ObservationSet's
// vocabularies.
struct Observation {
  int object = 0;
  int model = 0;
  int cls = 0;
  double confidence = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// assign(c, ω)
struct Atom {
  int cls = 0;
  int object = 0;

  friend auto operator<=>(const Atom& a, const Atom& b) {
    if (auto cmp = a.object <=> b.object; cmp != 0) return cmp;
    return a.cls <=> b.cls;
  }
  friend bool operator==(const Atom&, const Atom&) = default;
};

// accept(f, c)
struct ModelClass {
  int model = 0;
  int cls = 0;

  friend auto operator<=>(const ModelClass&, const ModelClass&) = default;
};

// The observation facts O over a fixed vocabulary of objects, models and
// classes. At most one entry per (object, model) pair.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(std::vector<std::string> objects,
                 std::vector<std::string> models,
                 std::vector<std::string> classes)
      : objects_(std::move(objects)),
        models_(std::move(models)),
        classes_(std::move(classes)) {}

  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<std::string>& models() const { return models_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<Observation>& entries() const { return entries_; }

  int num_objects() const { return static_cast<int>(objects_.size()); }
  int num_models() const { return static_cast<int>(models_.size()); }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  int num_pairs() const { return num_models() * num_classes(); }
  int pair_index(int model, int cls) const { return model * num_classes() + cls; }

  // Throws InputError on out-of-range indices, confidence outside [0,1] or a
  // second entry for the same (object, model).
  void add(const Observation& obs);

  // Same vocabularies, different entries.
  ObservationSet with_entries(std::vector<Observation> entries) const;

  // Lookup helpers; return -1 when absent.
  int model_index(std::string_view id) const;
  int class_index(std::string_view id) const;
  int object_index(std::string_view id) const;

  // Entry indices grouped by object.
  std::vector<std::vector<int>> entries_by_object() const;

  // Number of objects carrying at least one entry.
  int num_observed_objects() const;

  // Throws InputError if any invariant is broken.
  void validate() const;

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> models_;
  std::vector<std::string> classes_;
  std::vector<Observation> entries_;
  std::unordered_set<std::int64_t> keys_;
};

}  // namespace abfuse
