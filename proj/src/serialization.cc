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

#include "abfuse/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace abfuse {

using nlohmann::json;

namespace {

int lookup(const std::vector<std::string>& ids, const std::string& id, const char* what) {
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    if (ids[i] == id) return i;
  }
  throw InputError(std::string("unknown ") + what + " '" + id + "'");
}

json condition_to_json(const Condition& c, const std::vector<std::string>& models,
                       const std::vector<std::string>& classes) {
  switch (c.kind) {
    case Condition::Kind::kDisagreeWith:
      return {{"kind", "disagree_with"}, {"model", models.at(c.model)}};
    case Condition::Kind::kConfidenceBelow:
      return {{"kind", "confidence_below"}, {"threshold", c.threshold}};
    case Condition::Kind::kClassIs:
      return {{"kind", "class_is"}, {"class", classes.at(c.cls)}};
    case Condition::Kind::kAllOf: {
      json children = json::array();
      for (const auto& child : c.children) children.push_back(condition_to_json(child, models, classes));
      return {{"kind", "all_of"}, {"conditions", children}};
    }
  }
  return {};
}

Condition condition_from_json(const json& j, const std::vector<std::string>& models,
                              const std::vector<std::string>& classes) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "disagree_with") {
    return Condition::disagree_with(lookup(models, j.at("model").get<std::string>(), "model"));
  }
  if (kind == "confidence_below") {
    const double t = j.at("threshold").get<double>();
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("condition threshold outside [0,1]");
    return Condition::confidence_below(t);
  }
  if (kind == "class_is") {
    return Condition::class_is(lookup(classes, j.at("class").get<std::string>(), "class"));
  }
  if (kind == "all_of") {
    std::vector<Condition> children;
    for (const auto& child : j.at("conditions")) children.push_back(condition_from_json(child, models, classes));
    return Condition::all_of(std::move(children));
  }
  throw InputError("unknown condition kind '" + kind + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_rule_set(std::ostream& os, const RuleSet& rules,
                    const std::vector<std::string>& models,
                    const std::vector<std::string>& classes) {
  for (int k = 0; k < static_cast<int>(rules.epsilon_grid().size()); ++k) {
    for (int f = 0; f < rules.num_models(); ++f) {
      for (int c = 0; c < rules.num_classes(); ++c) {
        json conds = json::array();
        for (const auto& cond : rules.rule(f, c, k).conditions) {
          conds.push_back(condition_to_json(cond, models, classes));
        }
        json rec = {{"model_id", models.at(f)},
                    {"class_id", classes.at(c)},
                    {"epsilon", rules.epsilon_grid()[k]},
                    {"conditions", conds}};
        os << rec.dump() << "\n";
      }
    }
  }
}

RuleSet read_rule_set(const std::filesystem::path& path,
                      const std::vector<std::string>& models,
                      const std::vector<std::string>& classes) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  struct Rec {
    int f, c;
    double eps;
    std::vector<Condition> conds;
  };
  std::vector<Rec> recs;
  std::vector<double> grid;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Rec r{lookup(models, j.at("model_id").get<std::string>(), "model"),
            lookup(classes, j.at("class_id").get<std::string>(), "class"),
            j.at("epsilon").get<double>(),
            {}};
      for (const auto& cj : j.at("conditions")) r.conds.push_back(condition_from_json(cj, models, classes));
      bool known = false;
      for (double g : grid) known |= std::abs(g - r.eps) < 1e-9;
      if (!known) grid.push_back(r.eps);
      recs.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (grid.empty()) throw InputError(path.string() + ": no rules");
  std::sort(grid.begin(), grid.end());
  RuleSet rules(static_cast<int>(models.size()), static_cast<int>(classes.size()), grid);
  for (auto& r : recs) rules.rule(r.f, r.c, rules.epsilon_index(r.eps)).conditions = std::move(r.conds);
  return rules;
}

NormalizerMode parse_normalizer(const std::string& text) {
  if (text == "per_object") return NormalizerMode::kPerObject;
  if (text == "per_ground_rule") return NormalizerMode::kPerGroundRule;
  throw InputError("unknown normalizer mode '" + text + "'");
}

std::string to_string(NormalizerMode mode) {
  return mode == NormalizerMode::kPerObject ? "per_object" : "per_ground_rule";
}

Domain read_domain(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    Domain d;
    d.classes = j.contains("classes") ? j["classes"].get<std::vector<std::string>>()
                                      : Domain::default_classes();
    if (!j.contains("ic_pairs") || (j["ic_pairs"].is_string() && j["ic_pairs"] == "all")) {
      d = Domain::all_pairs(d.classes);
    } else {
      for (const auto& pair : j["ic_pairs"]) {
        if (!pair.is_array() || pair.size() != 2) throw InputError("ic pair must have two classes");
        d.add_ic(lookup(d.classes, pair[0].get<std::string>(), "class"),
                 lookup(d.classes, pair[1].get<std::string>(), "class"));
      }
    }
    d.normalizer = parse_normalizer(j.value("normalizer_mode", std::string("per_object")));
    d.directed_ground_rules = j.value("directed_ground_rules", false);
    return d;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_domain(std::ostream& os, const Domain& d) {
  json pairs = json::array();
  for (auto [a, b] : d.ic_pairs) pairs.push_back({d.classes.at(a), d.classes.at(b)});
  json j = {{"classes", d.classes},
            {"ic_pairs", pairs},
            {"normalizer_mode", to_string(d.normalizer)},
            {"directed_ground_rules", d.directed_ground_rules}};
  os << j.dump(2) << "\n";
}

ShiftScenario read_scenario(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    const auto seed = j.value("seed", std::uint64_t{0});
    ShiftScenario s = j.contains("preset") ? preset_scenario(j["preset"].get<std::string>(), seed)
                                           : ShiftScenario{};
    s.seed = seed;
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    read("classes", s.classes);
    read("models", s.models);
    read("class_prior", s.class_prior);
    read("conditions", s.conditions);
    read("model_home", s.model_home);
    read("confusion_targets", s.confusion_targets);
    read("n_train", s.n_train);
    read("n_test", s.n_test);
    read("train_mixture", s.train_mixture);
    read("train_intensity", s.train_intensity);
    read("test_mixture", s.test_mixture);
    read("test_intensity", s.test_intensity);
    read("home_intensity", s.home_intensity);
    read("detect_probability", s.detect_probability);
    read("correct_conf_mean", s.correct_conf_mean);
    read("correct_conf_sd", s.correct_conf_sd);
    read("wrong_conf_mean", s.wrong_conf_mean);
    read("wrong_conf_sd", s.wrong_conf_sd);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_trace(std::ostream& os, const std::vector<HsStep>& trace,
                 const std::vector<std::string>& models,
                 const std::vector<std::string>& classes) {
  for (const HsStep& s : trace) {
    json rec = {{"model_id", models.at(s.model)},
                {"class_id", classes.at(s.cls)},
                {"chosen_epsilon", s.chosen_epsilon ? json(*s.chosen_epsilon) : json(nullptr)},
                {"s_size_after", s.size_after}};
    os << rec.dump() << "\n";
  }
}

void write_labels(std::ostream& os, const std::vector<LabelCandidate>& labels,
                  const ObservationSet& v) {
  for (const LabelCandidate& l : labels) {
    json rec = {{"object_id", v.objects().at(l.object)},
                {"class_id", v.classes().at(l.cls)},
                {"model_id", v.models().at(l.model)},
                {"confidence", l.confidence}};
    os << rec.dump() << "\n";
  }
}

std::vector<LabelCandidate> read_labels(const std::filesystem::path& path,
                                        const ObservationSet& v) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<LabelCandidate> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LabelCandidate l;
      l.object = lookup(v.objects(), j.at("object_id").get<std::string>(), "object");
      l.cls = lookup(v.classes(), j.at("class_id").get<std::string>(), "class");
      l.model = lookup(v.models(), j.at("model_id").get<std::string>(), "model");
      l.confidence = j.at("confidence").get<double>();
      out.push_back(l);
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_metrics(std::ostream& os, const Metrics& m) {
  json j = {{"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"accuracy", m.accuracy},
            {"inconsistency", m.inconsistency},
            {"runtime_per_object", m.runtime_per_object},
            {"n_objects", m.n_objects}};
  os << j.dump(2) << "\n";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace abfuse
