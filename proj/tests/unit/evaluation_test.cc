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

#include <sstream>

#include "doctest.h"

#include "abfuse/pipeline.hpp"
#include "abfuse/synthgen.hpp"
#include "support/oracles.hpp"

using namespace abfuse;

TEST_CASE("perfect labels score one everywhere") {
  const std::vector<int> gt = {0, 1, 2};
  const Metrics m = score_labels({{0, 0}, {1, 1}, {2, 2}}, gt);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.n_objects == 3);
}

TEST_CASE("no labels score zero") {
  const Metrics m = score_labels({}, {0, 1});
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(m.accuracy == 0.0);
}

TEST_CASE("one right and one wrong label") {
  const Metrics m = score_labels({{0, 0}, {1, 0}}, {0, 1});
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(0.5));
  CHECK(m.accuracy == doctest::Approx(0.5));
}

TEST_CASE("atom scoring separates recall from exact accuracy") {
  // Object 0 has the true class and a spurious one, object 1 only a wrong one.
  const std::vector<Atom> atoms = {{0, 0}, {1, 0}, {2, 1}};
  const Metrics m = score_atoms(atoms, {0, 1});
  CHECK(m.precision == doctest::Approx(1.0 / 3.0));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.accuracy == 0.0);
  CHECK_THROWS_AS(score_atoms(atoms, {-1, -1}), InputError);
}

TEST_CASE("metric records satisfy the F1 identity and accuracy bound") {
  oracle::Rng rng(71);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> gt(10);
    for (int& g : gt) g = oracle::uniform_int(rng, -1, 3);
    gt[0] = 1;
    std::vector<Atom> atoms;
    std::map<int, int> labels;
    for (int o = 0; o < 10; ++o) {
      for (int c = 0; c < 4; ++c) {
        if (oracle::uniform_int(rng, 0, 2) == 0) atoms.push_back({c, o});
      }
      if (oracle::uniform_int(rng, 0, 1)) labels[o] = oracle::uniform_int(rng, 0, 3);
    }
    for (const Metrics& m : {score_atoms(atoms, gt), score_labels(labels, gt)}) {
      CHECK(m.f1 == doctest::Approx(harmonic_f1(m.precision, m.recall)));
      CHECK(m.accuracy <= m.recall + 1e-12);
      CHECK(m.precision >= 0.0);
      CHECK(m.precision <= 1.0);
    }
  }
}

namespace {

SweepInputs small_inputs(std::uint64_t seed) {
  const ShiftScenario s = heterogeneous_scenario(3, 3, 120, 60, seed);
  const SyntheticDataset data = generate(s);
  return {data.train.observations, data.train.labels, data.test.observations, data.test.labels,
          Domain::all_pairs(s.classes)};
}

}  // namespace

TEST_CASE("a one-cell sweep yields one cell per method") {
  SweepOptions opt;
  opt.delta_grid = {0.3};
  opt.epsilon_grid = {0.4};
  const SweepGrid grid = run_sweep(small_inputs(1), opt);
  CHECK(grid.cells.size() == opt.methods.size());
  for (const SweepCell& c : grid.cells) {
    CHECK(c.delta == 0.3);
    CHECK(c.epsilon == 0.4);
  }
}

TEST_CASE("the default grid gives eleven by eleven cells per method") {
  SweepOptions opt;
  opt.methods = {Method::kIp, Method::kHsTb};
  const SweepGrid grid = run_sweep(small_inputs(2), opt);
  CHECK(grid.deltas.size() == 11);
  CHECK(grid.epsilons.size() == 11);
  CHECK(grid.cells.size() == 2 * 121);
  std::ostringstream csv;
  write_sweep_csv(csv, grid);
  int lines = 0;
  for (char ch : csv.str()) lines += ch == '\n';
  CHECK(lines == 1 + 2 * 121);
  CHECK(csv.str().rfind("delta,epsilon,method,precision,recall,f1,accuracy,inconsistency,"
                        "runtime_per_object,n_objects,status",
                        0) == 0);
}

TEST_CASE("repeats of deterministic methods agree") {
  SweepOptions opt;
  opt.delta_grid = {0.1, 0.5};
  opt.epsilon_grid = {0.2, 0.6};
  opt.repeats = 5;
  opt.jobs = 3;
  const SweepGrid grid = run_sweep(small_inputs(3), opt);
  for (const SweepCell& c : grid.cells) {
    REQUIRE(c.per_repeat.size() == 5);
    for (const Metrics& m : c.per_repeat) {
      CHECK(m.f1 == c.per_repeat[0].f1);
      CHECK(m.precision == c.per_repeat[0].precision);
      CHECK(m.inconsistency == c.per_repeat[0].inconsistency);
    }
    CHECK(c.mean.f1 == doctest::Approx(c.per_repeat[0].f1));
  }
}

TEST_CASE("parallel and serial sweeps agree") {
  const SweepInputs in = small_inputs(4);
  SweepOptions opt;
  opt.delta_grid = {0.01, 0.3, 1.0};
  opt.epsilon_grid = {0.1, 0.5};
  const SweepGrid serial = run_sweep(in, opt);
  opt.jobs = 4;
  const SweepGrid parallel = run_sweep(in, opt);
  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].method == parallel.cells[i].method);
    CHECK(serial.cells[i].feasible == parallel.cells[i].feasible);
    CHECK(serial.cells[i].mean.f1 == parallel.cells[i].mean.f1);
    CHECK(serial.cells[i].ip_objective == parallel.cells[i].ip_objective);
  }
}

TEST_CASE("the IP objective is monotone in delta across a sweep") {
  SweepOptions opt;
  opt.methods = {Method::kIp};
  opt.epsilon_grid = {0.3};
  const SweepGrid grid = run_sweep(small_inputs(5), opt);
  long long prev = -1;
  for (const SweepCell& c : grid.cells) {
    const long long obj = c.feasible ? c.ip_objective : -1;
    CHECK(obj >= prev);
    prev = obj;
  }
}

TEST_CASE("IP with tie-breaking ignores object input order") {
  const SweepInputs in = small_inputs(6);
  const RuleSet rules = learn_rule_set(in.train, in.train_gt, generate_candidates(in.train),
                                       kDefaultGrid);
  std::vector<Observation> reversed(in.test.entries().rbegin(), in.test.entries().rend());
  const ObservationSet shuffled = in.test.with_entries(reversed);
  for (double delta : {0.2, 1.0}) {
    const auto a = run_ip(in.test, rules, 0.4, delta, in.domain, true);
    const auto b = run_ip(shuffled, rules, 0.4, delta, in.domain, true);
    REQUIRE(a.feasible == b.feasible);
    if (!a.feasible) continue;
    CHECK(a.labels == b.labels);
    CHECK(score_output(a, in.test_gt, true).f1 == score_output(b, in.test_gt, true).f1);
  }
}

TEST_CASE("method names and grids parse") {
  CHECK(parse_methods("ip,ip_tb,hs,hs_tb,mv,best,avg").size() == 7);
  CHECK(to_string(parse_method("hs_tb")) == "hs_tb");
  CHECK_THROWS_AS(parse_method("svm"), InputError);
  CHECK(parse_grid("0.1,0.5") == std::vector<double>{0.1, 0.5});
  CHECK_THROWS_AS(parse_grid(""), InputError);
  CHECK_THROWS_AS(parse_grid("0.1,x"), InputError);
  CHECK_THROWS_AS(parse_grid("1.2"), InputError);
}
