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

#include "abfuse/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "abfuse/deduction.hpp"
#include "json.hpp"

namespace abfuse {

namespace {

void check_distribution(const std::vector<double>& p, std::size_t n, const char* what) {
  if (p.empty()) return;
  if (p.size() != n) throw InputError(std::string(what) + " has the wrong length");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError(std::string(what) + " has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw InputError(std::string(what) + " does not sum to 1");
}

void check_intensities(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) throw InputError(std::string(what) + " needs one value per condition");
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError(std::string(what) + " outside [0,1]");
  }
}

std::vector<double> or_uniform(const std::vector<double>& p, std::size_t n) {
  return p.empty() ? std::vector<double>(n, 1.0 / static_cast<double>(n)) : p;
}

}  // namespace

void ShiftScenario::validate() const {
  if (classes.empty()) throw InputError("scenario has no classes");
  if (models.empty()) throw InputError("scenario has no models");
  if (conditions.empty()) throw InputError("scenario has no conditions");
  if (n_train < 0 || n_test < 0) throw InputError("negative object count");
  check_distribution(class_prior, classes.size(), "class_prior");
  check_distribution(train_mixture, conditions.size(), "train_mixture");
  check_distribution(test_mixture, conditions.size(), "test_mixture");
  check_intensities(train_intensity, conditions.size(), "train_intensity");
  check_intensities(test_intensity, conditions.size(), "test_intensity");
  if (model_home.size() != models.size()) throw InputError("model_home needs one entry per model");
  for (int h : model_home) {
    if (h < -1 || h >= static_cast<int>(conditions.size())) throw InputError("model_home out of range");
  }
  if (!(home_intensity >= 0.0 && home_intensity <= 1.0)) throw InputError("home_intensity outside [0,1]");
  if (!(detect_probability >= 0.0 && detect_probability <= 1.0)) {
    throw InputError("detect_probability outside [0,1]");
  }
  if (!confusion_targets.empty()) {
    if (confusion_targets.size() != models.size()) {
      throw InputError("confusion_targets needs one matrix per model");
    }
    for (const Matrix& m : confusion_targets) {
      if (m.size() != classes.size()) throw InputError("confusion matrix has the wrong shape");
      for (const auto& row : m) check_distribution(row, classes.size(), "confusion row");
    }
  }
}

Matrix interpolate_confusion(const Matrix& target, double intensity) {
  Matrix out = target;
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t c = 0; c < out[r].size(); ++c) {
      out[r][c] = (1.0 - intensity) * (r == c ? 1.0 : 0.0) + intensity * target[r][c];
    }
  }
  return out;
}

std::vector<Matrix> resolved_targets(const ShiftScenario& s) {
  if (!s.confusion_targets.empty()) return s.confusion_targets;
  const std::size_t nc = s.classes.size();
  std::mt19937_64 rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Matrix> targets;
  for (std::size_t f = 0; f < s.models.size(); ++f) {
    Matrix t(nc, std::vector<double>(nc, 0.0));
    for (std::size_t c = 0; c < nc; ++c) {
      if (nc == 1) {
        t[c][c] = 1.0;
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, nc - 2);
      std::size_t primary = pick(rng);
      if (primary >= c) ++primary;
      const double rest = nc > 2 ? 0.3 / static_cast<double>(nc - 2) : 0.0;
      for (std::size_t d = 0; d < nc; ++d) {
        if (d == c) continue;
        t[c][d] = d == primary ? (nc > 2 ? 0.7 : 1.0) : rest;
      }
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

namespace {

SyntheticSplit generate_split(const ShiftScenario& s, const std::vector<Matrix>& targets,
                              int n, const std::vector<double>& mixture,
                              const std::vector<double>& intensity,
                              const std::string& prefix, std::mt19937_64& rng) {
  std::vector<std::string> ids;
  ids.reserve(n);
  const int width = std::max<int>(5, static_cast<int>(std::to_string(n).size()));
  for (int i = 0; i < n; ++i) {
    std::ostringstream os;
    os << prefix << std::setw(width) << std::setfill('0') << i;
    ids.push_back(os.str());
  }
  SyntheticSplit split{ObservationSet(ids, s.models, s.classes), {}, {}};

  const std::size_t nc = s.classes.size();
  const auto prior = or_uniform(s.class_prior, nc);
  const auto mix = or_uniform(mixture, s.conditions.size());
  std::discrete_distribution<int> draw_class(prior.begin(), prior.end());
  std::discrete_distribution<int> draw_condition(mix.begin(), mix.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> correct_conf(s.correct_conf_mean, s.correct_conf_sd);
  std::normal_distribution<double> wrong_conf(s.wrong_conf_mean, s.wrong_conf_sd);

  for (int i = 0; i < n; ++i) {
    const int truth = draw_class(rng);
    const int cond = draw_condition(rng);
    split.labels.push_back(truth);
    split.condition.push_back(cond);
    for (int f = 0; f < static_cast<int>(s.models.size()); ++f) {
      const double detect = unit(rng);
      const double shift =
          s.model_home[f] == cond ? s.home_intensity : intensity[cond];
      const auto& row = targets[f][truth];
      std::vector<double> probs(nc);
      for (std::size_t c = 0; c < nc; ++c) {
        probs[c] = (1.0 - shift) * (static_cast<int>(c) == truth ? 1.0 : 0.0) + shift * row[c];
      }
      std::discrete_distribution<int> draw_pred(probs.begin(), probs.end());
      const int predicted = draw_pred(rng);
      double conf = predicted == truth ? correct_conf(rng) : wrong_conf(rng);
      conf = std::clamp(conf, 0.0, 1.0);
      if (detect < s.detect_probability) split.observations.add({i, f, predicted, conf});
    }
  }
  return split;
}

}  // namespace

SyntheticDataset generate(const ShiftScenario& s) {
  s.validate();
  const auto targets = resolved_targets(s);
  std::mt19937_64 rng(s.seed);
  SyntheticDataset out;
  out.train = generate_split(s, targets, s.n_train, s.train_mixture, s.train_intensity,
                             "train-", rng);
  out.test = generate_split(s, targets, s.n_test, s.test_mixture, s.test_intensity,
                            "test-", rng);
  return out;
}

ShiftScenario preset_scenario(const std::string& name, std::uint64_t seed) {
  std::string kind = name;
  int variant = 1;
  if (auto us = name.find('_'); us != std::string::npos) {
    kind = name.substr(0, us);
    try {
      variant = std::stoi(name.substr(us + 1));
    } catch (const std::exception&) {
      throw InputError("bad preset variant in '" + name + "'");
    }
    if (variant < 1) throw InputError("preset variant must be >= 1");
  }

  ShiftScenario s;
  s.classes = Domain::default_classes();
  s.conditions = {"rain", "snow", "fog", "maple", "dust"};
  s.models = {"baseline", "rain", "snow", "fog", "maple", "dust"};
  s.model_home = {-1, 0, 1, 2, 3, 4};
  s.seed = seed;
  const int k = static_cast<int>(s.conditions.size());
  const int r = (variant - 1) % k;
  s.train_mixture.assign(k, 1.0 / k);
  s.train_intensity.assign(k, 0.3);

  std::vector<double> mix(k, 0.0);
  double level = 0.6;
  if (kind == "UM" || kind == "HUM") {
    mix.assign(k, 0.05);
    mix[r] = 0.8;
    if (kind == "HUM") level = 0.9;
  } else if (kind == "BM") {
    mix.assign(k, 0.1 / (k - 2));
    mix[r] = 0.45;
    mix[(r + 1) % k] = 0.45;
  } else if (kind == "MM") {
    mix.assign(k, 0.24);
    mix[(r + k - 1) % k] = 0.04;
  } else if (kind == "AM") {
    mix.assign(k, 1.0 / k);
  } else {
    throw InputError("unknown preset '" + name + "' (expected UM, BM, MM, AM or HUM)");
  }
  s.test_mixture = mix;
  s.test_intensity.assign(k, level);
  return s;
}

ShiftScenario heterogeneous_scenario(int num_models, int num_classes, int n_train,
                                     int n_test, std::uint64_t seed) {
  if (num_models < 1 || num_classes < 1) throw InputError("need at least one model and class");
  ShiftScenario s;
  for (int c = 0; c < num_classes; ++c) {
    s.classes.push_back(c < 4 ? Domain::default_classes()[c] : "class" + std::to_string(c));
  }
  for (int f = 0; f < num_models; ++f) {
    s.models.push_back("m" + std::to_string(f));
    s.conditions.push_back("cond" + std::to_string(f));
    s.model_home.push_back(f);
  }
  s.n_train = n_train;
  s.n_test = n_test;
  s.train_intensity.assign(num_models, 0.5);
  s.test_intensity.assign(num_models, 0.8);
  s.seed = seed;
  return s;
}

void write_split(const SyntheticSplit& split, const std::filesystem::path& dir) {
  using nlohmann::json;
  std::filesystem::create_directories(dir);
  const ObservationSet& obs = split.observations;

  json manifest;
  manifest["models"] = obs.models();
  manifest["classes"] = obs.classes();
  manifest["matched"] = true;
  manifest["ground_truth"] = "gt.jsonl";
  json preds = json::object();
  for (const auto& m : obs.models()) preds[m] = "pred_" + m + ".jsonl";
  manifest["predictions"] = preds;
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "gt.jsonl");
    for (int o = 0; o < obs.num_objects(); ++o) {
      json j;
      j["image_id"] = "synthetic";
      j["object_id"] = obs.objects()[o];
      j["class_id"] = obs.classes()[split.labels[o]];
      out << j.dump() << "\n";
    }
  }
  std::vector<std::ofstream> files;
  for (const auto& m : obs.models()) files.emplace_back(dir / ("pred_" + m + ".jsonl"));
  for (const Observation& e : obs.entries()) {
    json j;
    j["image_id"] = "synthetic";
    j["model_id"] = obs.models()[e.model];
    j["class_id"] = obs.classes()[e.cls];
    j["confidence"] = e.confidence;
    j["object_id"] = obs.objects()[e.object];
    files[e.model] << j.dump() << "\n";
  }
  for (auto& f : files) {
    if (!f) throw InputError("failed writing split to " + dir.string());
  }
}

}  // namespace abfuse
