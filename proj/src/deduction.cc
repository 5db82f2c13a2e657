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

#include "abfuse/deduction.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace abfuse {

const std::vector<std::string>& Domain::default_classes() {
  static const std::vector<std::string> kClasses = {"pedestrians", "vehicles",
                                                    "nature", "construction"};
  return kClasses;
}

Domain Domain::all_pairs(std::vector<std::string> classes) {
  Domain d;
  d.classes = std::move(classes);
  for (int a = 0; a < d.num_classes(); ++a) {
    for (int b = a + 1; b < d.num_classes(); ++b) d.ic_pairs.emplace_back(a, b);
  }
  return d;
}

void Domain::add_ic(int a, int b) {
  if (a == b) throw InputError("integrity constraint pairs a class with itself");
  if (a < 0 || b < 0 || a >= num_classes() || b >= num_classes()) {
    throw InputError("integrity constraint references an unknown class");
  }
  if (a > b) std::swap(a, b);
  if (!conflicts(a, b)) ic_pairs.emplace_back(a, b);
}

bool Domain::conflicts(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::find(ic_pairs.begin(), ic_pairs.end(), std::make_pair(a, b)) !=
         ic_pairs.end();
}

Hypothesis Hypothesis::none(int num_models, int num_classes) {
  return {num_models, num_classes,
          std::vector<char>(static_cast<std::size_t>(num_models) * num_classes, 0)};
}

Hypothesis Hypothesis::all(int num_models, int num_classes) {
  return {num_models, num_classes,
          std::vector<char>(static_cast<std::size_t>(num_models) * num_classes, 1)};
}

bool Hypothesis::subset_of(const Hypothesis& other) const {
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    if (accepted[i] && !other.accepted[i]) return false;
  }
  return true;
}

std::vector<Violation> find_violations(std::span<const Atom> assigned,
                                       const Domain& domain) {
  std::vector<Atom> atoms(assigned.begin(), assigned.end());
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

  std::vector<Violation> out;
  // Atoms are grouped by object after sorting.
  for (std::size_t lo = 0; lo < atoms.size();) {
    std::size_t hi = lo;
    while (hi < atoms.size() && atoms[hi].object == atoms[lo].object) ++hi;
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = i + 1; j < hi; ++j) {
        if (domain.conflicts(atoms[i].cls, atoms[j].cls)) {
          out.push_back({atoms[lo].object, std::min(atoms[i].cls, atoms[j].cls),
                         std::max(atoms[i].cls, atoms[j].cls)});
        }
      }
    }
    lo = hi;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double inc_from_violations(long long violations, int observed_objects,
                           const Domain& domain) {
  if (observed_objects <= 0 || violations <= 0) return 0.0;
  const double weight = domain.directed_ground_rules ? 2.0 : 1.0;
  switch (domain.normalizer) {
    case NormalizerMode::kPerObject:
      return std::min(1.0, weight * violations / observed_objects);
    case NormalizerMode::kPerGroundRule: {
      if (domain.ic_pairs.empty()) return 0.0;
      const double ground_rules =
          weight * observed_objects * static_cast<double>(domain.ic_pairs.size());
      return std::min(1.0, weight * violations / ground_rules);
    }
  }
  return 0.0;
}

double count_inc(std::span<const Atom> assigned, const Domain& domain,
                 int observed_objects) {
  const auto v = find_violations(assigned, domain);
  return inc_from_violations(static_cast<long long>(v.size()), observed_objects, domain);
}

long long violation_budget(double delta, int observed_objects, const Domain& domain) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("delta outside [0,1]");
  const long long max_v =
      static_cast<long long>(observed_objects) * static_cast<long long>(domain.ic_pairs.size());
  // inc_from_violations is non-decreasing in the count.
  long long lo = 0, hi = max_v;
  while (lo < hi) {
    const long long mid = lo + (hi - lo + 1) / 2;
    if (within_delta(inc_from_violations(mid, observed_objects, domain), delta)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

FixpointResult fixpoint(const FilteredObservations& obs, const Hypothesis& h,
                        const Domain& domain) {
  FixpointResult out;

  // Stratum 1.
  out.errors = obs.flagged;
  std::set<std::tuple<int, int, int>> error_atoms;
  for (const Observation& e : obs.flagged) error_atoms.emplace(e.model, e.cls, e.object);

  // Stratum 2 over the whole fact base O.
  auto derive = [&](const Observation& e) {
    if (!h.accepts(e.model, e.cls)) return;
    if (error_atoms.count({e.model, e.cls, e.object})) return;
    out.assigned.push_back({e.cls, e.object});
  };
  for (const Observation& e : obs.surviving.entries()) derive(e);
  for (const Observation& e : obs.flagged) derive(e);
  std::sort(out.assigned.begin(), out.assigned.end());
  out.assigned.erase(std::unique(out.assigned.begin(), out.assigned.end()),
                     out.assigned.end());
  out.pred = static_cast<int>(out.assigned.size());

  // Stratum 3.
  out.violated_ic = find_violations(out.assigned, domain);
  out.inc = inc_from_violations(static_cast<long long>(out.violated_ic.size()),
                                obs.num_observed_objects(), domain);
  std::sort(out.errors.begin(), out.errors.end(),
            [](const Observation& a, const Observation& b) {
              return std::tie(a.object, a.model, a.cls) < std::tie(b.object, b.model, b.cls);
            });
  return out;
}

}  // namespace abfuse
