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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "abfuse/observation.hpp"

namespace abfuse {

inline constexpr double kDefaultPrimaryIou = 0.90;

// Axis-aligned box in pixel coordinates.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  // Finite, non-negative, positive extent on both axes.
  bool valid() const;
};

struct Detection {
  std::string image_id;
  std::string model_id;
  std::string class_id;
  double confidence = 0.0;
  std::optional<BoundingBox> bbox;
  // Set for pre-matched (synthetic) records that bypass geometric matching.
  std::optional<std::string> object_id;
};

struct GroundTruthObject {
  std::string image_id;
  std::string object_id;
  std::string class_id;
  std::optional<BoundingBox> bbox;
};

// Throws InputError when either box is degenerate.
double compute_iou(const BoundingBox& a, const BoundingBox& b);

struct MatchResult {
  ObservationSet observations;
  // Ground-truth objects that received no detection from any model.
  std::vector<std::string> uncovered_objects;
  int stage1_matches = 0;
  int stage2_matches = 0;
};

// Two-stage assignment of detections to ground-truth objects, performed per
// image.
//
// Stage 1: for every model and every ground-truth object (input order), take
// the first not-yet-used detection of that model, in descending confidence
// order with input order breaking ties, whose IoU exceeds `primary_iou`.
//
// Stage 2: every object left without a Stage-1 assignment from any model
// receives the single remaining detection (any model) with the highest
// positive IoU. Ties go to the lower model index, then to the earlier
// detection in that model's confidence order. A detection is used at most once
// across both stages.
MatchResult match_detections(const std::vector<GroundTruthObject>& gt,
                             const std::vector<Detection>& dets,
                             const std::vector<std::string>& models,
                             const std::vector<std::string>& classes,
                             double primary_iou = kDefaultPrimaryIou);

struct Dataset {
  std::vector<std::string> models;
  std::vector<std::string> classes;
  std::vector<GroundTruthObject> ground_truth;
  std::vector<Detection> detections;
  // True when prediction records carry object ids instead of boxes.
  bool prematched = false;
};

// Reads a JSON manifest:
//   {"models": [...], "classes": [...],
//    "predictions": {"<model>": "<file>", ...},
//    "ground_truth": "<file>", "matched": false}
// Record files are one JSON object per line; relative paths resolve against
// the manifest's directory. Errors carry file name and line number.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Matching for detection datasets, direct conversion for pre-matched ones.
MatchResult build_observations(const Dataset& data,
                               double primary_iou = kDefaultPrimaryIou);

// Ground-truth class index per object of `obs`; -1 for objects without one.
std::vector<int> ground_truth_labels(const Dataset& data,
                                     const ObservationSet& obs);

}  // namespace abfuse
