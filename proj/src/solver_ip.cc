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

#include "abfuse/solver_ip.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>
#include <set>

namespace abfuse {

bool IpInstance::pred(int model, int cls, int object) const {
  const auto& s = support[pair_index(model, cls)];
  return std::binary_search(s.begin(), s.end(), object);
}

IpInstance build_instance(const FilteredObservations& obs, const Domain& domain,
                          double delta) {
  const ObservationSet& o = obs.surviving;
  if (domain.num_classes() != o.num_classes()) {
    throw InputError("domain classes do not match the observation classes");
  }
  IpInstance inst;
  inst.num_objects = o.num_objects();
  inst.num_models = o.num_models();
  inst.num_classes = o.num_classes();
  inst.ic_pairs = domain.ic_pairs;
  inst.support.resize(inst.num_pairs());
  inst.coverable.assign(inst.num_objects, 0);
  for (const Observation& e : o.entries()) {
    inst.support[inst.pair_index(e.model, e.cls)].push_back(e.object);
    inst.coverable[e.object] = 1;
  }
  for (auto& s : inst.support) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  inst.delta_budget = violation_budget(delta, obs.num_observed_objects(), domain);
  inst.object_names = o.objects();
  inst.model_names = o.models();
  inst.class_names = o.classes();
  return inst;
}

int IpSolution::num_eliminated() const {
  return static_cast<int>(std::count(elim.begin(), elim.end(), 1));
}

Hypothesis IpSolution::hypothesis(int num_models, int num_classes) const {
  Hypothesis h = Hypothesis::none(num_models, num_classes);
  for (std::size_t p = 0; p < elim.size(); ++p) h.accepted[p] = elim[p] ? 0 : 1;
  return h;
}

IpSolution evaluate_elim(const IpInstance& inst, const std::vector<char>& elim) {
  IpSolution s;
  s.elim = elim;
  for (int f = 0; f < inst.num_models; ++f) {
    for (int c = 0; c < inst.num_classes; ++c) {
      if (elim[inst.pair_index(f, c)]) continue;
      for (int o : inst.support[inst.pair_index(f, c)]) s.assigned.push_back({c, o});
    }
  }
  std::sort(s.assigned.begin(), s.assigned.end());
  s.assigned.erase(std::unique(s.assigned.begin(), s.assigned.end()), s.assigned.end());
  s.objective = static_cast<long long>(s.assigned.size());
  Domain d;
  d.classes.resize(inst.num_classes);
  d.ic_pairs = inst.ic_pairs;
  s.conflicts = find_violations(s.assigned, d);
  return s;
}

namespace {

// (objective desc, eliminations asc, Elim vector lexicographic asc).
bool preferred(long long obj_a, int elims_a, const std::vector<char>& elim_a,
               long long obj_b, int elims_b, const std::vector<char>& elim_b) {
  if (obj_a != obj_b) return obj_a > obj_b;
  if (elims_a != elims_b) return elims_a < elims_b;
  return elim_a < elim_b;
}

using Mask = std::uint32_t;

class BranchAndBound {
 public:
  explicit BranchAndBound(const IpInstance& inst) : inst_(inst) {
    nc_ = inst.num_classes;
    if (nc_ > 16) throw InputError("IP solver supports at most 16 classes");
    build_tables();
  }

  IpSolution run() {
    initialise();
    search(0);
    if (!found_) {
      IpSolution s;
      s.status = IpStatus::kInfeasible;
      s.elim.assign(inst_.num_pairs(), 0);
      s.nodes = nodes_;
      return s;
    }
    IpSolution s = evaluate_elim(inst_, best_elim_);
    s.status = IpStatus::kOptimal;
    s.nodes = nodes_;
    return s;
  }

 private:
  // Per-mask lookup tables over the class conflict graph.
  void build_tables() {
    neighbours_.assign(nc_, 0);
    for (auto [a, b] : inst_.ic_pairs) {
      neighbours_[a] |= Mask{1} << b;
      neighbours_[b] |= Mask{1} << a;
    }
    const std::size_t n_masks = std::size_t{1} << nc_;
    edges_.assign(n_masks, 0);
    stable_.assign(n_masks, 0);
    closed_nbr_.assign(n_masks, 0);
    for (Mask m = 1; m < n_masks; ++m) {
      const int low = std::countr_zero(m);
      const Mask rest = m & (m - 1);
      edges_[m] = edges_[rest] + std::popcount(neighbours_[low] & rest);
      closed_nbr_[m] = closed_nbr_[rest] | neighbours_[low];
      // Maximum independent set: drop `low`, or keep it and drop its neighbours.
      stable_[m] = std::max<int>(stable_[rest], 1 + stable_[rest & ~neighbours_[low]]);
    }
  }

  struct Contribution {
    long long atoms_all = 0, atoms_acc = 0, zero_cost = 0, extra = 0, violations = 0,
              uncovered = 0;
  };

  Contribution contribution(int o) const {
    const Mask all = all_mask_[o], acc = acc_mask_[o];
    const Mask optional = all & ~acc;
    const Mask eligible = optional & ~closed_nbr_[acc];
    Contribution c;
    c.atoms_all = std::popcount(all);
    c.atoms_acc = std::popcount(acc);
    c.zero_cost = stable_[eligible];
    c.extra = std::popcount(optional) - c.zero_cost;
    c.violations = edges_[acc];
    c.uncovered = (inst_.coverable[o] && all == 0) ? 1 : 0;
    return c;
  }

  void add(const Contribution& c, long long sign) {
    atoms_all_ += sign * c.atoms_all;
    atoms_acc_ += sign * c.atoms_acc;
    zero_cost_ += sign * c.zero_cost;
    extra_ += sign * c.extra;
    violations_ += sign * c.violations;
    uncovered_ += sign * c.uncovered;
  }

  void initialise() {
    const int n = inst_.num_objects;
    const int np = inst_.num_pairs();
    cnt_all_.assign(static_cast<std::size_t>(n) * nc_, 0);
    cnt_acc_.assign(static_cast<std::size_t>(n) * nc_, 0);
    all_mask_.assign(n, 0);
    acc_mask_.assign(n, 0);
    for (int p = 0; p < np; ++p) {
      const int c = p % nc_;
      for (int o : inst_.support[p]) {
        ++cnt_all_[idx(o, c)];
        all_mask_[o] |= Mask{1} << c;
      }
    }

    // Pairs whose atoms can never take part in a conflict are accepted
    // outright; the rest are branched on, most supported first.
    elim_.assign(np, 0);
    std::vector<int> order;
    for (int p = 0; p < np; ++p) {
      const int c = p % nc_;
      bool free = true;
      for (int o : inst_.support[p]) {
        if (all_mask_[o] & neighbours_[c]) {
          free = false;
          break;
        }
      }
      if (free) {
        for (int o : inst_.support[p]) {
          ++cnt_acc_[idx(o, c)];
          acc_mask_[o] |= Mask{1} << c;
        }
      } else {
        order.push_back(p);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return inst_.support[a].size() > inst_.support[b].size();
    });
    order_ = std::move(order);

    atoms_all_ = atoms_acc_ = zero_cost_ = extra_ = violations_ = uncovered_ = 0;
    for (int o = 0; o < n; ++o) add(contribution(o), +1);
    eliminated_ = 0;
    found_ = false;
    nodes_ = 0;
  }

  std::size_t idx(int o, int c) const { return static_cast<std::size_t>(o) * nc_ + c; }

  void accept(int p, int delta) {
    const int c = p % nc_;
    for (int o : inst_.support[p]) {
      auto& cnt = cnt_acc_[idx(o, c)];
      const bool flips = delta > 0 ? cnt == 0 : cnt == 1;
      if (flips) add(contribution(o), -1);
      cnt += delta;
      if (flips) {
        acc_mask_[o] ^= Mask{1} << c;
        add(contribution(o), +1);
      }
    }
  }

  void eliminate(int p, int delta) {
    const int c = p % nc_;
    for (int o : inst_.support[p]) {
      auto& cnt = cnt_all_[idx(o, c)];
      const bool flips = delta > 0 ? cnt == 1 : cnt == 0;
      if (flips) add(contribution(o), -1);
      cnt -= delta;
      if (flips) {
        all_mask_[o] ^= Mask{1} << c;
        add(contribution(o), +1);
      }
    }
    elim_[p] = delta > 0 ? 1 : 0;
    eliminated_ += delta;
  }

  void search(std::size_t depth) {
    ++nodes_;
    if (violations_ > inst_.delta_budget || uncovered_ > 0) return;
    const long long bound =
        atoms_acc_ + zero_cost_ + std::min(inst_.delta_budget - violations_, extra_);
    if (found_) {
      if (bound < best_objective_) return;
      if (bound == best_objective_ && eliminated_ > best_eliminated_) return;
    }
    if (depth == order_.size()) {
      // Every pair decided: the accepted atoms are the assignment.
      const long long objective = atoms_acc_;
      if (!found_ || preferred(objective, eliminated_, elim_, best_objective_,
                               best_eliminated_, best_elim_)) {
        found_ = true;
        best_objective_ = objective;
        best_eliminated_ = eliminated_;
        best_elim_ = elim_;
      }
      return;
    }
    const int p = order_[depth];
    accept(p, +1);
    search(depth + 1);
    accept(p, -1);

    eliminate(p, +1);
    search(depth + 1);
    eliminate(p, -1);
  }

  const IpInstance& inst_;
  int nc_ = 0;
  std::vector<Mask> neighbours_;
  std::vector<int> edges_;
  std::vector<Mask> closed_nbr_;
  std::vector<std::uint8_t> stable_;

  std::vector<int> cnt_all_, cnt_acc_;
  std::vector<Mask> all_mask_, acc_mask_;
  std::vector<int> order_;
  std::vector<char> elim_;
  long long atoms_all_ = 0, atoms_acc_ = 0, zero_cost_ = 0, extra_ = 0,
            violations_ = 0, uncovered_ = 0;
  int eliminated_ = 0;

  bool found_ = false;
  long long best_objective_ = 0;
  int best_eliminated_ = 0;
  std::vector<char> best_elim_;
  std::int64_t nodes_ = 0;
};

}  // namespace

IpSolution solve(const IpInstance& instance) {
  for (auto [a, b] : instance.ic_pairs) {
    if (a == b || a < 0 || b < 0 || a >= instance.num_classes || b >= instance.num_classes) {
      throw InputError("malformed integrity constraint in IP instance");
    }
  }
  return BranchAndBound(instance).run();
}

IpSolution brute_force_optimal(const IpInstance& inst) {
  const int np = inst.num_pairs();
  if (np > kBruteForceMaxPairs) {
    throw InputError("brute force limited to " + std::to_string(kBruteForceMaxPairs) +
                     " model-class pairs, instance has " + std::to_string(np));
  }
  bool found = false;
  long long best_obj = 0;
  int best_elims = 0;
  std::vector<char> best_elim;
  std::int64_t enumerated = 0;

  for (std::uint32_t mask = 0; mask < (1u << np); ++mask) {
    ++enumerated;
    std::vector<char> elim(np);
    for (int p = 0; p < np; ++p) elim[p] = (mask >> p) & 1u;

    // A[c][ω] = OR of accepted supports; Con at its minimum.
    long long objective = 0, conflicts = 0;
    bool covered = true;
    for (int o = 0; o < inst.num_objects; ++o) {
      std::vector<char> a(inst.num_classes, 0);
      for (int f = 0; f < inst.num_models; ++f) {
        for (int c = 0; c < inst.num_classes; ++c) {
          if (!elim[inst.pair_index(f, c)] && inst.pred(f, c, o)) a[c] = 1;
        }
      }
      const int count = static_cast<int>(std::count(a.begin(), a.end(), 1));
      objective += count;
      if (inst.coverable[o] && count == 0) covered = false;
      for (auto [c1, c2] : inst.ic_pairs) conflicts += a[c1] && a[c2];
    }
    if (!covered || conflicts > inst.delta_budget) continue;
    const int elims = static_cast<int>(std::count(elim.begin(), elim.end(), 1));
    if (!found || preferred(objective, elims, elim, best_obj, best_elims, best_elim)) {
      found = true;
      best_obj = objective;
      best_elims = elims;
      best_elim = elim;
    }
  }

  IpSolution s;
  if (!found) {
    s.status = IpStatus::kInfeasible;
    s.elim.assign(np, 0);
  } else {
    s = evaluate_elim(inst, best_elim);
    s.status = IpStatus::kOptimal;
  }
  s.nodes = enumerated;
  return s;
}

namespace {
std::string name_or_index(const std::vector<std::string>& names, int i) {
  return i < static_cast<int>(names.size()) ? names[i] : std::to_string(i);
}
}  // namespace

void dump_instance(std::ostream& os, const IpInstance& inst) {
  os << "objects " << inst.num_objects << "\n";
  os << "models " << inst.num_models << "\n";
  os << "classes " << inst.num_classes << "\n";
  os << "budget " << inst.delta_budget << "\n";
  for (auto [a, b] : inst.ic_pairs) {
    os << "ic " << name_or_index(inst.class_names, a) << " "
       << name_or_index(inst.class_names, b) << "\n";
  }
  for (int o = 0; o < inst.num_objects; ++o) {
    if (inst.coverable[o]) os << "coverable " << name_or_index(inst.object_names, o) << "\n";
  }
  for (int f = 0; f < inst.num_models; ++f) {
    for (int c = 0; c < inst.num_classes; ++c) {
      for (int o : inst.support[inst.pair_index(f, c)]) {
        os << "pred " << name_or_index(inst.model_names, f) << " "
           << name_or_index(inst.class_names, c) << " "
           << name_or_index(inst.object_names, o) << "\n";
      }
    }
  }
}

void dump_solution(std::ostream& os, const IpInstance& inst, const IpSolution& s) {
  os << "status " << (s.status == IpStatus::kOptimal ? "optimal" : "infeasible") << "\n";
  os << "objective " << s.objective << "\n";
  for (int f = 0; f < inst.num_models; ++f) {
    for (int c = 0; c < inst.num_classes; ++c) {
      os << "elim " << name_or_index(inst.model_names, f) << " "
         << name_or_index(inst.class_names, c) << " "
         << static_cast<int>(s.elim[inst.pair_index(f, c)]) << "\n";
    }
  }
}

}  // namespace abfuse
