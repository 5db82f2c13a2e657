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

#include "abfuse/tiebreak.hpp"
#include "support/oracles.hpp"

using namespace abfuse;

namespace {

std::vector<LabelCandidate> random_candidates(oracle::Rng& rng, int objects) {
  std::vector<LabelCandidate> out;
  for (int o = 0; o < objects; ++o) {
    const int n = oracle::uniform_int(rng, 1, 5);
    for (int k = 0; k < n; ++k) {
      // Coarse confidences force exact ties.
      out.push_back({o, oracle::uniform_int(rng, 0, 3), oracle::uniform_int(rng, 0, 4),
                     oracle::uniform_int(rng, 0, 4) / 4.0});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("the most confident label wins") {
  const std::vector<LabelCandidate> c = {{0, 0, 0, 0.9}, {0, 1, 1, 0.7}};
  const auto out = apply_tiebreaker(c);
  REQUIRE(out.size() == 1);
  CHECK(out.at(0) == LabelCandidate{0, 0, 0, 0.9});
}

TEST_CASE("a single candidate passes through") {
  const std::vector<LabelCandidate> c = {{3, 2, 1, 0.4}};
  CHECK(apply_tiebreaker(c).at(3) == c[0]);
}

TEST_CASE("exact ties go to the lower model, then the lower class") {
  std::vector<LabelCandidate> c = {{0, 1, 2, 0.8}, {0, 3, 1, 0.8}, {0, 0, 1, 0.8}};
  std::sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.cls < b.cls; });
  do {
    CHECK(apply_tiebreaker(c).at(0) == LabelCandidate{0, 0, 1, 0.8});
  } while (std::next_permutation(c.begin(), c.end(),
                                 [](auto& a, auto& b) { return a.cls < b.cls; }));
}

TEST_CASE("one label per object, independent of input order") {
  oracle::Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    auto c = random_candidates(rng, oracle::uniform_int(rng, 1, 8));
    const auto out = apply_tiebreaker(c);
    std::vector<int> objects;
    for (const auto& x : c) objects.push_back(x.object);
    std::sort(objects.begin(), objects.end());
    objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
    CHECK(out.size() == objects.size());
    for (const auto& [o, label] : out) {
      CHECK(std::find(c.begin(), c.end(), label) != c.end());
      for (const auto& x : c) {
        if (x.object == o) CHECK_FALSE(tiebreak_prefers(x, label));
      }
    }
    std::shuffle(c.begin(), c.end(), rng);
    CHECK(apply_tiebreaker(c) == out);
  }
}

TEST_CASE("scaling confidences and reapplying change nothing") {
  oracle::Rng rng(52);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_candidates(rng, 6);
    const auto out = apply_tiebreaker(c);
    std::vector<LabelCandidate> scaled = c;
    for (auto& x : scaled) x.confidence *= 0.5;
    const auto out_scaled = apply_tiebreaker(scaled);
    for (const auto& [o, label] : out) {
      CHECK(out_scaled.at(o).cls == label.cls);
      CHECK(out_scaled.at(o).model == label.model);
    }
    std::vector<LabelCandidate> again;
    for (const auto& [o, label] : out) again.push_back(label);
    CHECK(apply_tiebreaker(again) == out);
  }
}

TEST_CASE("sparse object ids take the general path") {
  const std::vector<LabelCandidate> c = {{1000000, 0, 1, 0.5}, {1000000, 1, 0, 0.5}, {7, 2, 0, 0.1}};
  const auto out = apply_tiebreaker(c);
  CHECK(out.at(1000000) == LabelCandidate{1000000, 1, 0, 0.5});
  CHECK(out.at(7).cls == 2);
}

TEST_CASE("confidences outside [0,1] are rejected") {
  const std::vector<LabelCandidate> c = {{0, 0, 0, 1.5}};
  CHECK_THROWS_AS(apply_tiebreaker(c), InputError);
}

TEST_CASE("IP candidates carry the most confident accepted support") {
  ObservationSet obs({"w", "v"}, {"f1", "f2", "f3"}, {"car", "tree"});
  obs.add({0, 0, 0, 0.6});
  obs.add({0, 1, 0, 0.9});
  obs.add({0, 2, 1, 0.95});
  obs.add({1, 0, 1, 0.5});
  IpSolution s;
  s.status = IpStatus::kOptimal;
  s.elim = {0, 0, 1, 0, 0, 1};  // f2 car eliminated, f3 tree eliminated
  s.assigned = {{0, 0}, {1, 1}};
  const auto cands = ip_candidates(s, obs);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0] == LabelCandidate{0, 0, 0, 0.6});
  CHECK(cands[1] == LabelCandidate{1, 1, 0, 0.5});
}

TEST_CASE("HS candidates are the selected tuples") {
  HsResult r;
  r.selected = {{2, 1, 0, 0.3}, {0, 0, 1, 0.8}};
  const auto cands = hs_candidates(r);
  CHECK(cands == std::vector<LabelCandidate>{{2, 0, 1, 0.3}, {0, 1, 0, 0.8}});
}
