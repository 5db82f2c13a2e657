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

#include "abfuse/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace abfuse {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ObservationSet

void ObservationSet::add(const Observation& obs) {
  if (obs.object < 0 || obs.object >= num_objects() || obs.model < 0 ||
      obs.model >= num_models() || obs.cls < 0 || obs.cls >= num_classes()) {
    throw InputError("observation index out of range");
  }
  if (!(obs.confidence >= 0.0 && obs.confidence <= 1.0)) {
    throw InputError("confidence outside [0,1]");
  }
  const auto key = static_cast<std::int64_t>(obs.object) * num_models() + obs.model;
  if (!keys_.insert(key).second) {
    throw InputError("second observation for object '" + objects_[obs.object] +
                     "' from model '" + models_[obs.model] + "'");
  }
  entries_.push_back(obs);
}

ObservationSet ObservationSet::with_entries(
    std::vector<Observation> entries) const {
  ObservationSet out(objects_, models_, classes_);
  for (const Observation& e : entries) out.add(e);
  return out;
}

namespace {
int find_index(const std::vector<std::string>& v, std::string_view id) {
  auto it = std::find(v.begin(), v.end(), id);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}
}  // namespace

int ObservationSet::model_index(std::string_view id) const {
  return find_index(models_, id);
}
int ObservationSet::class_index(std::string_view id) const {
  return find_index(classes_, id);
}
int ObservationSet::object_index(std::string_view id) const {
  return find_index(objects_, id);
}

std::vector<std::vector<int>> ObservationSet::entries_by_object() const {
  std::vector<std::vector<int>> out(objects_.size());
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    out[entries_[i].object].push_back(i);
  }
  return out;
}

int ObservationSet::num_observed_objects() const {
  std::vector<char> seen(objects_.size(), 0);
  int n = 0;
  for (const Observation& e : entries_) {
    if (!seen[e.object]) {
      seen[e.object] = 1;
      ++n;
    }
  }
  return n;
}

void ObservationSet::validate() const {
  std::vector<char> seen(objects_.size() * models_.size(), 0);
  for (const Observation& e : entries_) {
    if (e.object < 0 || e.object >= num_objects() || e.model < 0 ||
        e.model >= num_models() || e.cls < 0 || e.cls >= num_classes()) {
      throw InputError("observation index out of range");
    }
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) {
      throw InputError("confidence outside [0,1]");
    }
    char& s = seen[static_cast<std::size_t>(e.object) * models_.size() + e.model];
    if (s) throw InputError("duplicate (object, model) observation");
    s = 1;
  }
}

// ---------------------------------------------------------------------------
// Geometry

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 &&
         x_min < x_max && y_min < y_max;
}

double compute_iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) {
    throw InputError("degenerate bounding box");
  }
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct IndexedDetection {
  int input_pos;
  int model;
  int cls;
};

std::unordered_map<std::string, int> index_map(
    const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> m;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) m.emplace(ids[i], i);
  return m;
}

}  // namespace

MatchResult match_detections(const std::vector<GroundTruthObject>& gt,
                             const std::vector<Detection>& dets,
                             const std::vector<std::string>& models,
                             const std::vector<std::string>& classes,
                             double primary_iou) {
  if (!(primary_iou > 0.0 && primary_iou <= 1.0)) {
    throw InputError("primary IoU threshold must lie in (0,1]");
  }
  const auto model_of = index_map(models);
  const auto class_of = index_map(classes);

  std::vector<std::string> object_ids;
  object_ids.reserve(gt.size());
  for (const auto& g : gt) object_ids.push_back(g.object_id);
  MatchResult result{ObservationSet(object_ids, models, classes), {}, 0, 0};

  // image -> gt positions, image -> model -> detection positions (sorted).
  std::map<std::string, std::vector<int>> gt_by_image;
  for (int i = 0; i < static_cast<int>(gt.size()); ++i) {
    if (!gt[i].bbox) throw InputError("ground truth without bbox: " + gt[i].object_id);
    gt_by_image[gt[i].image_id].push_back(i);
  }
  std::map<std::string, std::vector<std::vector<IndexedDetection>>> det_by_image;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    const Detection& d = dets[i];
    auto mi = model_of.find(d.model_id);
    auto ci = class_of.find(d.class_id);
    if (mi == model_of.end()) throw InputError("unknown model id: " + d.model_id);
    if (ci == class_of.end()) throw InputError("unknown class id: " + d.class_id);
    if (!d.bbox) throw InputError("detection without bbox");
    auto& per_model = det_by_image[d.image_id];
    per_model.resize(models.size());
    per_model[mi->second].push_back({i, mi->second, ci->second});
  }
  for (auto& [image, per_model] : det_by_image) {
    for (auto& list : per_model) {
      std::stable_sort(list.begin(), list.end(),
                       [&](const IndexedDetection& a, const IndexedDetection& b) {
                         return dets[a.input_pos].confidence >
                                dets[b.input_pos].confidence;
                       });
    }
  }

  std::vector<char> used(dets.size(), 0);
  std::vector<int> assignments(gt.size(), 0);

  for (const auto& [image, gt_positions] : gt_by_image) {
    auto it = det_by_image.find(image);
    if (it == det_by_image.end()) continue;
    const auto& per_model = it->second;

    // Stage 1.
    for (int f = 0; f < static_cast<int>(per_model.size()); ++f) {
      for (int g : gt_positions) {
        for (const IndexedDetection& d : per_model[f]) {
          if (used[d.input_pos]) continue;
          if (compute_iou(*gt[g].bbox, *dets[d.input_pos].bbox) > primary_iou) {
            used[d.input_pos] = 1;
            result.observations.add(
                {g, f, d.cls, dets[d.input_pos].confidence});
            ++assignments[g];
            ++result.stage1_matches;
            break;
          }
        }
      }
    }

    // Stage 2.
    for (int g : gt_positions) {
      if (assignments[g] > 0) continue;
      const IndexedDetection* best = nullptr;
      double best_iou = 0.0;
      for (const auto& list : per_model) {
        for (const IndexedDetection& d : list) {
          if (used[d.input_pos]) continue;
          const double iou = compute_iou(*gt[g].bbox, *dets[d.input_pos].bbox);
          if (iou > best_iou) {
            best_iou = iou;
            best = &d;
          }
        }
      }
      if (best != nullptr) {
        used[best->input_pos] = 1;
        result.observations.add(
            {g, best->model, best->cls, dets[best->input_pos].confidence});
        ++assignments[g];
        ++result.stage2_matches;
      }
    }
  }

  for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
    if (assignments[g] == 0) result.uncovered_objects.push_back(gt[g].object_id);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void fail_at(const std::filesystem::path& file, int line,
                          const std::string& what) {
  throw InputError(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::optional<BoundingBox> parse_bbox(const json& j,
                                      const std::filesystem::path& file,
                                      int line) {
  if (!j.contains("bbox") || j["bbox"].is_null()) return std::nullopt;
  const json& b = j["bbox"];
  if (!b.is_array() || b.size() != 4) fail_at(file, line, "bbox must be [x_min,y_min,x_max,y_max]");
  BoundingBox box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                  b[3].get<double>()};
  if (!box.valid()) fail_at(file, line, "invalid bbox");
  return box;
}

template <typename Fn>
void for_each_record(const std::filesystem::path& file, Fn&& fn) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      fail_at(file, line, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) fail_at(file, line, "record is not an object");
    try {
      fn(j, line);
    } catch (const json::exception& e) {
      fail_at(file, line, std::string("bad field: ") + e.what());
    }
  }
}

std::vector<std::string> string_list(const json& j, const char* key,
                                     const std::filesystem::path& file) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw InputError(file.string() + ": missing list '" + key + "'");
  }
  std::vector<std::string> out = j[key].get<std::vector<std::string>>();
  std::set<std::string> uniq(out.begin(), out.end());
  if (uniq.size() != out.size()) {
    throw InputError(file.string() + ": duplicate entries in '" + key + "'");
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();

  Dataset data;
  data.models = string_list(manifest, "models", manifest_path);
  data.classes = string_list(manifest, "classes", manifest_path);
  data.prematched = manifest.value("matched", false);
  const std::set<std::string> model_set(data.models.begin(), data.models.end());
  const std::set<std::string> class_set(data.classes.begin(), data.classes.end());

  if (!manifest.contains("ground_truth")) {
    throw InputError(manifest_path.string() + ": missing 'ground_truth'");
  }
  const auto gt_file = base / manifest["ground_truth"].get<std::string>();
  std::unordered_set<std::string> seen_objects;
  for_each_record(gt_file, [&](const json& j, int line) {
    GroundTruthObject g;
    g.image_id = j.value("image_id", "");
    g.object_id = j.at("object_id").get<std::string>();
    g.class_id = j.at("class_id").get<std::string>();
    g.bbox = parse_bbox(j, gt_file, line);
    if (!class_set.count(g.class_id)) fail_at(gt_file, line, "unknown class id '" + g.class_id + "'");
    if (!data.prematched && !g.bbox) fail_at(gt_file, line, "missing bbox");
    if (!seen_objects.insert(g.object_id).second) {
      fail_at(gt_file, line, "duplicate object_id '" + g.object_id +
                                 "' (unique name assumption violated)");
    }
    data.ground_truth.push_back(std::move(g));
  });

  if (!manifest.contains("predictions") || !manifest["predictions"].is_object()) {
    throw InputError(manifest_path.string() + ": missing 'predictions' map");
  }
  for (const std::string& model : data.models) {
    if (!manifest["predictions"].contains(model)) continue;
    const auto file = base / manifest["predictions"][model].get<std::string>();
    for_each_record(file, [&](const json& j, int line) {
      Detection d;
      d.image_id = j.value("image_id", "");
      d.model_id = j.at("model_id").get<std::string>();
      d.class_id = j.at("class_id").get<std::string>();
      d.confidence = j.at("confidence").get<double>();
      d.bbox = parse_bbox(j, file, line);
      if (j.contains("object_id")) d.object_id = j["object_id"].get<std::string>();
      if (!model_set.count(d.model_id)) fail_at(file, line, "unknown model id '" + d.model_id + "'");
      if (d.model_id != model) fail_at(file, line, "record for model '" + d.model_id + "' in file of '" + model + "'");
      if (!class_set.count(d.class_id)) fail_at(file, line, "unknown class id '" + d.class_id + "'");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) fail_at(file, line, "confidence outside [0,1]");
      if (data.prematched && !d.object_id) fail_at(file, line, "pre-matched record without object_id");
      if (!data.prematched && !d.bbox) fail_at(file, line, "missing bbox");
      if (data.prematched && !seen_objects.count(*d.object_id)) {
        fail_at(file, line, "unknown object_id '" + *d.object_id + "'");
      }
      data.detections.push_back(std::move(d));
    });
  }
  for (const auto& [model, _] : manifest["predictions"].items()) {
    if (!model_set.count(model)) {
      throw InputError(manifest_path.string() + ": predictions for undeclared model '" + model + "'");
    }
  }
  return data;
}

MatchResult build_observations(const Dataset& data, double primary_iou) {
  if (!data.prematched) {
    return match_detections(data.ground_truth, data.detections, data.models,
                            data.classes, primary_iou);
  }
  std::vector<std::string> object_ids;
  std::unordered_map<std::string, int> object_of;
  for (const auto& g : data.ground_truth) {
    object_of.emplace(g.object_id, static_cast<int>(object_ids.size()));
    object_ids.push_back(g.object_id);
  }
  MatchResult result{ObservationSet(object_ids, data.models, data.classes), {}, 0, 0};
  const auto model_of = index_map(data.models);
  const auto class_of = index_map(data.classes);
  std::vector<char> covered(object_ids.size(), 0);
  for (const Detection& d : data.detections) {
    const int o = object_of.at(*d.object_id);
    result.observations.add({o, model_of.at(d.model_id), class_of.at(d.class_id),
                             d.confidence});
    covered[o] = 1;
  }
  for (int o = 0; o < static_cast<int>(object_ids.size()); ++o) {
    if (!covered[o]) result.uncovered_objects.push_back(object_ids[o]);
  }
  return result;
}

std::vector<int> ground_truth_labels(const Dataset& data,
                                     const ObservationSet& obs) {
  std::vector<int> labels(obs.num_objects(), -1);
  for (const auto& g : data.ground_truth) {
    const int o = obs.object_index(g.object_id);
    if (o >= 0) labels[o] = obs.class_index(g.class_id);
  }
  return labels;
}

}  // namespace abfuse
