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

#include "doctest.h"

#include "abfuse/baselines.hpp"
#include "support/oracles.hpp"

using namespace abfuse;

namespace {

Metrics with_f1(double f1, double accuracy = 0.0) {
  Metrics m;
  m.f1 = f1;
  m.accuracy = accuracy;
  return m;
}

}  // namespace

TEST_CASE("majority vote takes the modal class") {
  ObservationSet obs({"w"}, {"f1", "f2", "f3"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.5});
  obs.add({0, 1, 0, 0.4});
  obs.add({0, 2, 1, 0.99});
  CHECK(majority_vote(obs) == std::map<int, int>{{0, 0}});
}

TEST_CASE("a split vote goes to the more confident class") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.6});
  obs.add({0, 1, 1, 0.9});
  CHECK(majority_vote(obs) == std::map<int, int>{{0, 1}});
}

TEST_CASE("a split vote with equal confidence goes to the lower model's class") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 0, 1, 0.7});
  obs.add({0, 1, 0, 0.7});
  CHECK(majority_vote(obs) == std::map<int, int>{{0, 1}});
}

TEST_CASE("a single model's vote is its prediction") {
  oracle::Rng rng(61);
  const ObservationSet obs = oracle::random_observations(rng, 20, 1, 4, 0.8);
  CHECK(majority_vote(obs) == model_labels(obs, 0));
}

TEST_CASE("the vote is always one of the object's predictions") {
  oracle::Rng rng(62);
  for (int i = 0; i < 100; ++i) {
    const ObservationSet obs = oracle::random_observations(rng, 10, 5, 4, 0.7);
    for (const auto& [o, c] : majority_vote(obs)) {
      bool found = false;
      for (const Observation& e : obs.entries()) found |= e.object == o && e.cls == c;
      CHECK(found);
    }
  }
}

TEST_CASE("best individual model") {
  CHECK(best_individual({with_f1(0.57), with_f1(0.52), with_f1(0.40)}) == 0);
  CHECK(best_individual({with_f1(0.5, 0.3), with_f1(0.5, 0.4)}) == 1);
  CHECK(best_individual({with_f1(0.5, 0.4), with_f1(0.5, 0.4)}) == 0);
  CHECK(best_individual({with_f1(0.2)}) == 0);
  CHECK_THROWS_AS(best_individual({}), InputError);
}

TEST_CASE("the best model is found under any permutation") {
  oracle::Rng rng(63);
  for (int i = 0; i < 100; ++i) {
    std::vector<Metrics> ms;
    for (int k = 0; k < 5; ++k) ms.push_back(with_f1(oracle::uniform_int(rng, 0, 10) / 10.0,
                                                     oracle::uniform_int(rng, 0, 10) / 10.0));
    const Metrics best = ms[best_individual(ms)];
    std::shuffle(ms.begin(), ms.end(), rng);
    const Metrics again = ms[best_individual(ms)];
    CHECK(best.f1 == again.f1);
    CHECK(best.accuracy == again.accuracy);
  }
}

TEST_CASE("average of models") {
  CHECK(average_models({with_f1(0.4), with_f1(0.6)}).f1 == doctest::Approx(0.5));
  CHECK(average_models({with_f1(0.3), with_f1(0.3), with_f1(0.9)}).f1 == doctest::Approx(0.5));
  Metrics m;
  m.precision = 0.7;
  m.recall = 0.4;
  m.f1 = 0.5;
  m.accuracy = 0.35;
  const Metrics avg = average_models({m, m, m});
  CHECK(avg.precision == doctest::Approx(0.7));
  CHECK(avg.recall == doctest::Approx(0.4));
  CHECK(avg.f1 == doctest::Approx(0.5));
  CHECK(avg.accuracy == doctest::Approx(0.35));
}
