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

#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "abfuse/baselines.hpp"
#include "abfuse/cli.hpp"
#include "abfuse/model_io.hpp"
#include "abfuse/serialization.hpp"
#include "temp_dir.hpp"

using namespace abfuse;
using abfuse::testing::TempDir;
using abfuse::testing::read_file;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> columns(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

// Generated data plus learned rules, shared by several cases.
struct Workspace {
  TempDir dir;
  std::string train, test, domain, rules;
  Workspace() {
    REQUIRE(run({"gen", "--preset", "UM_1", "--seed", "4", "--n-train", "300", "--n-test", "80",
                 "--out", dir.path().string()})
                .code == kExitOk);
    train = (dir / "train/manifest.json").string();
    test = (dir / "test/manifest.json").string();
    domain = (dir / "domain.json").string();
    rules = (dir / "rules.jsonl").string();
    REQUIRE(run({"learn", "--train", train, "--out", rules}).code == kExitOk);
  }
};

// Three objects whose cover forces a conflict under a zero budget.
std::string forced_conflict(const TempDir& dir) {
  dir.write("gt.jsonl", R"({"object_id": "a", "class_id": "car"})" "\n"
                        R"({"object_id": "b", "class_id": "tree"})" "\n"
                        R"({"object_id": "c", "class_id": "car"})" "\n");
  dir.write("f1.jsonl", R"({"model_id": "f1", "class_id": "car", "confidence": 0.9, "object_id": "a"})" "\n"
                        R"({"model_id": "f1", "class_id": "car", "confidence": 0.8, "object_id": "c"})" "\n");
  dir.write("f2.jsonl", R"({"model_id": "f2", "class_id": "tree", "confidence": 0.7, "object_id": "b"})" "\n"
                        R"({"model_id": "f2", "class_id": "tree", "confidence": 0.6, "object_id": "c"})" "\n");
  dir.write("domain.json", R"({"classes": ["car", "tree"], "ic_pairs": "all"})");
  std::ostringstream rules;
  write_rule_set(rules, RuleSet::empty(2, 2, {0.1, 0.5}), {"f1", "f2"}, {"car", "tree"});
  dir.write("rules.jsonl", rules.str());
  return dir.write("manifest.json",
                   R"({"models": ["f1", "f2"], "classes": ["car", "tree"], "matched": true,)"
                   R"("predictions": {"f1": "f1.jsonl", "f2": "f2.jsonl"}, "ground_truth": "gt.jsonl"})")
      .string();
}

}  // namespace

TEST_CASE("gen writes train, test and domain files") {
  TempDir dir;
  const Run r = run({"gen", "--preset", "UM_1", "--seed", "1", "--n-train", "20", "--n-test", "10",
                     "--out", dir.path().string()});
  CHECK(r.code == kExitOk);
  for (const char* f : {"train/manifest.json", "train/gt.jsonl", "test/manifest.json",
                        "test/gt.jsonl", "domain.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const Dataset d = load_dataset(dir / "test/manifest.json");
  CHECK(d.ground_truth.size() == 10);
}

TEST_CASE("identical seeds give identical generated files") {
  TempDir a, b;
  for (TempDir* d : {&a, &b}) {
    REQUIRE(run({"gen", "--preset", "BM_2", "--seed", "9", "--n-train", "30", "--n-test", "30",
                 "--out", d->path().string()})
                .code == kExitOk);
  }
  CHECK(read_file(a / "test/gt.jsonl") == read_file(b / "test/gt.jsonl"));
  CHECK(read_file(a / "train/pred_rain.jsonl") == read_file(b / "train/pred_rain.jsonl"));
}

TEST_CASE("learn writes a rule file the next stage accepts") {
  Workspace w;
  const Dataset d = load_dataset(w.train);
  const RuleSet rules = read_rule_set(w.rules, d.models, d.classes);
  CHECK(rules.epsilon_grid().size() == 11);
  CHECK(rules.num_models() == static_cast<int>(d.models.size()));
}

TEST_CASE("abduce writes labels and metrics for both solvers") {
  Workspace w;
  TempDir out;
  Run r = run({"abduce", "--data", w.test, "--rules", w.rules, "--domain", w.domain, "--solver",
               "ip", "--delta", "0.3", "--epsilon", "0.4", "--dump-instance", "--out",
               (out / "ip").string()});
  CHECK(r.code == kExitOk);
  CHECK(std::filesystem::exists(out / "ip/labels.jsonl"));
  CHECK(std::filesystem::exists(out / "ip/metrics.json"));
  CHECK(std::filesystem::exists(out / "ip/instance.txt"));
  r = run({"abduce", "--data", w.test, "--rules", w.rules, "--solver", "hs", "--delta", "0.3",
           "--epsilon-set", "0.1,0.4", "--out", (out / "hs").string()});
  CHECK(r.code == kExitOk);
  const auto trace = lines_of(read_file(out / "hs/trace.jsonl"));
  REQUIRE_FALSE(trace.empty());
  const json step = json::parse(trace[0]);
  CHECK(step.contains("model_id"));
  CHECK(step.contains("chosen_epsilon"));
  CHECK(step.contains("s_size_after"));

  // The written labels score the same through eval.
  r = run({"eval", "--labels", (out / "hs/labels.jsonl").string(), "--data", w.test});
  CHECK(r.code == kExitOk);
  const json from_eval = json::parse(r.out);
  const json from_abduce = json::parse(read_file(out / "hs/metrics.json"));
  CHECK(from_eval["f1"].get<double>() == doctest::Approx(from_abduce["f1"].get<double>()));
}

TEST_CASE("abduce rejects a delta outside [0,1]") {
  Workspace w;
  TempDir out;
  const Run r = run({"abduce", "--data", w.test, "--rules", w.rules, "--delta", "1.5", "--out",
                     out.path().string()});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("delta") != std::string::npos);
}

TEST_CASE("an infeasible IP exits with the infeasible code") {
  TempDir dir;
  const std::string manifest = forced_conflict(dir);
  const std::string rules = (dir / "rules.jsonl").string();
  Run r = run({"abduce", "--data", manifest, "--rules", rules, "--domain",
               (dir / "domain.json").string(), "--delta", "0", "--epsilon", "0.1", "--out",
               (dir / "out").string()});
  CHECK(r.code == kExitInfeasible);
  r = run({"abduce", "--data", manifest, "--rules", rules, "--domain",
           (dir / "domain.json").string(), "--delta", "0.34", "--epsilon", "0.1", "--out",
           (dir / "out2").string()});
  CHECK(r.code == kExitOk);
}

TEST_CASE("sweep over the default grid gives 121 rows per method") {
  Workspace w;
  TempDir out;
  const Run r = run({"sweep", "--rules", w.rules, "--test", w.test, "--methods", "ip,hs_tb",
                     "--out", out.path().string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines_of(read_file(out / "sweep.csv"));
  REQUIRE(rows.size() == 1 + 2 * 121);
  std::map<std::string, int> per_method;
  for (std::size_t i = 1; i < rows.size(); ++i) ++per_method[columns(rows[i])[2]];
  CHECK(per_method["ip"] == 121);
  CHECK(per_method["hs_tb"] == 121);
  const json manifest = json::parse(read_file(out / "manifest.json"));
  CHECK(manifest.contains("dataset_hash"));
  CHECK(manifest.contains("seed"));
}

TEST_CASE("repeated deterministic runs produce identical rows") {
  Workspace w;
  TempDir out;
  const Run r = run({"sweep", "--train", w.train, "--test", w.test, "--delta-grid", "0.3",
                     "--epsilon-grid", "0.4", "--methods", "ip_tb,mv", "--repeats", "3",
                     "--per-repeat", "--out", out.path().string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines_of(read_file(out / "sweep.csv"));
  REQUIRE(rows.size() == 1 + 2 * 3);
  const auto header = columns(rows[0]);
  for (std::size_t i = 1; i < rows.size(); i += 3) {
    for (std::size_t k = 1; k < 3; ++k) {
      const auto a = columns(rows[i]), b = columns(rows[i + k]);
      REQUIRE(a.size() == header.size());
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != "runtime_per_object") CHECK(a[c] == b[c]);
      }
    }
  }
}

TEST_CASE("sweep input errors") {
  Workspace w;
  TempDir out;
  CHECK(run({"sweep", "--rules", w.rules, "--test", w.test, "--delta-grid", "", "--out",
             out.path().string()})
            .code == kExitInputError);
  CHECK(run({"sweep", "--test", w.test, "--out", out.path().string()}).code == kExitInputError);
  CHECK(run({"sweep", "--rules", w.rules, "--train", w.train, "--test", w.test, "--out",
             out.path().string()})
            .code == kExitInputError);
  CHECK(run({"sweep", "--rules", w.rules, "--test", w.test, "--methods", "svm", "--out",
             out.path().string()})
            .code == kExitInputError);
}

TEST_CASE("baseline mv matches the in-process vote") {
  Workspace w;
  TempDir out;
  REQUIRE(run({"baseline", "--method", "mv", "--data", w.test, "--out", out.path().string()})
              .code == kExitOk);
  const Dataset d = load_dataset(w.test);
  const ObservationSet obs = build_observations(d).observations;
  const auto expected = majority_vote(obs);
  const auto labels = read_labels(out / "labels.jsonl", obs);
  std::map<int, int> got;
  for (const auto& l : labels) got[l.object] = l.cls;
  CHECK(got == expected);
  CHECK(std::filesystem::exists(out / "metrics.json"));
}

TEST_CASE("unknown commands and missing files are input errors") {
  CHECK(run({"frobnicate"}).code == kExitInputError);
  CHECK(run({}).code == kExitInputError);
  TempDir out;
  CHECK(run({"baseline", "--method", "mv", "--data", (out / "none.json").string(), "--out",
             out.path().string()})
            .code == kExitInputError);
}
