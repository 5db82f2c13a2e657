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

#include <algorithm>

#include "doctest.h"

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"
#include "support/oracles.hpp"

using namespace abfuse;

namespace {

FilteredObservations unfiltered(const ObservationSet& obs) { return {obs, {}}; }

Domain car_tree() {
  Domain d;
  d.classes = {"car", "tree"};
  d.add_ic(0, 1);
  return d;
}

}  // namespace

TEST_CASE("the empty hypothesis derives nothing") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.9});
  obs.add({0, 1, 1, 0.8});
  const FixpointResult r = fixpoint(unfiltered(obs), Hypothesis::none(2, 2), car_tree());
  CHECK(r.assigned.empty());
  CHECK(r.pred == 0);
  CHECK(r.inc == 0.0);
  CHECK(r.violated_ic.empty());
}

TEST_CASE("accepting two conflicting labels yields one ground violation") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.9});
  obs.add({0, 1, 1, 0.8});
  const FixpointResult r = fixpoint(unfiltered(obs), Hypothesis::all(2, 2), car_tree());
  CHECK(r.assigned == std::vector<Atom>{{0, 0}, {1, 0}});
  CHECK(r.pred == 2);
  CHECK(r.violated_ic == std::vector<Violation>{{0, 0, 1}});
  CHECK(r.inc == doctest::Approx(1.0));
}

TEST_CASE("agreeing models produce one atom, not one per vote") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.9});
  obs.add({0, 1, 0, 0.8});
  const FixpointResult r = fixpoint(unfiltered(obs), Hypothesis::all(2, 2), car_tree());
  CHECK(r.assigned == std::vector<Atom>{{0, 0}});
  CHECK(r.pred == 1);
}

TEST_CASE("flagged observations support no assignment") {
  ObservationSet obs({"w"}, {"f1", "f2"}, {"car", "tree"});
  obs.add({0, 1, 0, 0.8});
  FilteredObservations f{obs, {{0, 0, 1, 0.9}}};
  const FixpointResult r = fixpoint(f, Hypothesis::all(2, 2), car_tree());
  CHECK(r.assigned == std::vector<Atom>{{0, 0}});
  CHECK(r.errors == std::vector<Observation>{{0, 0, 1, 0.9}});
}

TEST_CASE("inconsistency normalisation per object and per ground rule") {
  Domain d = Domain::all_pairs({"a", "b", "c", "d"});
  REQUIRE(d.ic_pairs.size() == 6);
  // Two objects, the first carries a and b.
  const std::vector<Atom> atoms = {{0, 0}, {1, 0}, {2, 1}};
  CHECK(count_inc(atoms, d, 2) == doctest::Approx(0.5));
  d.normalizer = NormalizerMode::kPerGroundRule;
  CHECK(count_inc(atoms, d, 2) == doctest::Approx(1.0 / 12.0));
  CHECK(count_inc(std::vector<Atom>{{0, 0}, {2, 1}}, d, 2) == 0.0);
  CHECK(count_inc(atoms, d, 0) == 0.0);
}

TEST_CASE("directed ground rules count each conflict twice") {
  Domain d = Domain::all_pairs({"a", "b", "c"});
  d.directed_ground_rules = true;
  const std::vector<Atom> atoms = {{0, 0}, {1, 0}};
  CHECK(count_inc(atoms, d, 4) == doctest::Approx(0.5));
  d.normalizer = NormalizerMode::kPerGroundRule;
  CHECK(count_inc(atoms, d, 4) == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("the violation budget is the largest count within delta") {
  Domain one = Domain::all_pairs({"a", "b"});
  CHECK(violation_budget(1.0, 5, one) == 5);
  CHECK(violation_budget(0.0, 5, one) == 0);
  CHECK(violation_budget(0.5, 5, one) == 2);
  Domain six = Domain::all_pairs({"a", "b", "c", "d"});
  CHECK(violation_budget(1.0, 5, six) == 30);
  CHECK(violation_budget(0.2, 10, six) == 2);
  six.normalizer = NormalizerMode::kPerGroundRule;
  CHECK(violation_budget(0.1, 10, six) == 6);
  CHECK_THROWS_AS(violation_budget(1.5, 5, six), InputError);
  for (double delta : kDefaultGrid) {
    for (Domain* d : {&one, &six}) {
      const long long b = violation_budget(delta, 7, *d);
      CHECK(within_delta(inc_from_violations(b, 7, *d), delta));
      if (b < 7 * static_cast<long long>(d->ic_pairs.size())) {
        CHECK_FALSE(within_delta(inc_from_violations(b + 1, 7, *d), delta));
      }
    }
  }
}

TEST_CASE("domain constraints are normalised and validated") {
  Domain d;
  d.classes = {"a", "b", "c"};
  d.add_ic(2, 0);
  d.add_ic(0, 2);
  CHECK(d.ic_pairs == std::vector<std::pair<int, int>>{{0, 2}});
  CHECK(d.conflicts(2, 0));
  CHECK_FALSE(d.conflicts(0, 1));
  CHECK_THROWS_AS(d.add_ic(1, 1), InputError);
  CHECK_THROWS_AS(d.add_ic(0, 3), InputError);
  CHECK(Domain::default_classes().size() == 4);
}

TEST_CASE("the fixpoint agrees with a naive evaluator") {
  oracle::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const int models = oracle::uniform_int(rng, 1, 4), classes = oracle::uniform_int(rng, 1, 4);
    const ObservationSet obs = oracle::random_observations(rng, oracle::uniform_int(rng, 0, 6),
                                                           models, classes, 0.7);
    const auto filtered = oracle::random_filtering(rng, obs, 0.3);
    const Domain d = oracle::random_domain(rng, classes);
    Hypothesis h = Hypothesis::none(models, classes);
    for (auto& a : h.accepted) a = oracle::uniform_int(rng, 0, 1);
    CHECK(fixpoint(filtered, h, d) == oracle::naive_fixpoint(filtered, h, d));
  }
}

TEST_CASE("accepting more pairs never shrinks the assignment") {
  oracle::Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const ObservationSet obs = oracle::random_observations(rng, 6, 3, 3, 0.8);
    const auto filtered = oracle::random_filtering(rng, obs, 0.2);
    const Domain d = oracle::random_domain(rng, 3);
    Hypothesis small = Hypothesis::none(3, 3), large = Hypothesis::none(3, 3);
    for (std::size_t k = 0; k < small.accepted.size(); ++k) {
      large.accepted[k] = oracle::uniform_int(rng, 0, 1);
      small.accepted[k] = large.accepted[k] && oracle::uniform_int(rng, 0, 1);
    }
    REQUIRE(small.subset_of(large));
    const auto a = fixpoint(filtered, small, d), b = fixpoint(filtered, large, d);
    CHECK(a.pred <= b.pred);
    CHECK(a.inc <= b.inc);
    CHECK(std::includes(b.assigned.begin(), b.assigned.end(), a.assigned.begin(), a.assigned.end()));
  }
}
