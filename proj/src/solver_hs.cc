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

#include "abfuse/solver_hs.hpp"

#include <algorithm>
#include <bit>
#include <random>

namespace abfuse {

void HsConfig::validate() const {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("delta outside [0,1]");
  if (epsilon_set.empty()) throw InputError("epsilon set is empty");
  for (double e : epsilon_set) {
    if (!(e >= 0.0 && e <= 1.0)) throw InputError("epsilon outside [0,1]");
  }
}

std::vector<Atom> HsResult::atoms() const {
  std::vector<Atom> out;
  out.reserve(selected.size());
  for (const Observation& o : selected) out.push_back({o.cls, o.object});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Observation> get_filtered_preds(int model, int cls, double epsilon,
                                            const ObservationSet& raw,
                                            const RuleSet& rules) {
  const ErrorRule& rule = rules.rule_at(model, cls, epsilon);
  const auto by_object = raw.entries_by_object();
  const auto& entries = raw.entries();
  std::vector<Observation> out;
  std::vector<Observation> sib;
  for (const Observation& e : entries) {
    if (e.model != model || e.cls != cls) continue;
    sib.clear();
    for (int i : by_object[e.object]) sib.push_back(entries[i]);
    if (!rule.flags(e, sib)) out.push_back(e);
  }
  return out;
}

double calc_incon(std::span<const Observation> s, const Domain& domain,
                  int observed_objects) {
  std::vector<Atom> atoms;
  atoms.reserve(s.size());
  for (const Observation& o : s) atoms.push_back({o.cls, o.object});
  return count_inc(atoms, domain, observed_objects);
}

std::vector<ModelClass> pair_order(int num_models, int num_classes,
                                   const HsConfig& config) {
  std::vector<ModelClass> order;
  for (int f = 0; f < num_models; ++f) {
    for (int c = 0; c < num_classes; ++c) order.push_back({f, c});
  }
  if (config.shuffle_pairs) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

HsResult heuristic_search(const ObservationSet& raw, const HsConfig& config,
                          const RuleSet& rules, const Domain& domain) {
  config.validate();
  if (domain.num_classes() != raw.num_classes()) {
    throw InputError("domain classes do not match the observation classes");
  }
  if (rules.num_models() != raw.num_models() || rules.num_classes() != raw.num_classes()) {
    throw InputError("rule set does not match the observation vocabulary");
  }
  std::vector<double> eps = config.epsilon_set;
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

  // Filtered prediction sets per (ε, pair), kept as a survival table over the
  // raw entries. Each distinct condition of a pair is evaluated once per entry
  // and shared by every ε.
  const int np = raw.num_pairs();
  const int nc = raw.num_classes();
  const std::size_t K = eps.size();
  std::vector<std::vector<Condition>> distinct(np);
  // Condition indices used by pair p at eps[k]: use_idx[use_off[p * K + k] ...].
  std::vector<int> use_idx;
  std::vector<std::size_t> use_off(static_cast<std::size_t>(np) * K + 1, 0);
  std::vector<int> grid_index(K);
  for (std::size_t k = 0; k < K; ++k) grid_index[k] = rules.epsilon_index(eps[k]);
  for (int f = 0; f < raw.num_models(); ++f) {
    for (int c = 0; c < nc; ++c) {
      const int p = raw.pair_index(f, c);
      for (std::size_t k = 0; k < K; ++k) {
        for (const Condition& cond : rules.rule(f, c, grid_index[k]).conditions) {
          auto it = std::find(distinct[p].begin(), distinct[p].end(), cond);
          if (it == distinct[p].end()) it = distinct[p].insert(distinct[p].end(), cond);
          use_idx.push_back(static_cast<int>(it - distinct[p].begin()));
        }
        use_off[p * K + k + 1] = use_idx.size();
      }
    }
  }
  auto uses = [&](int p, std::size_t k) {
    return std::span<const int>(use_idx.data() + use_off[p * K + k],
                                use_off[p * K + k + 1] - use_off[p * K + k]);
  };

  const auto& entries = raw.entries();
  // Entries grouped by object in one flat array; orig maps back to raw order.
  std::vector<int> offset(raw.num_objects() + 1, 0);
  for (const Observation& e : entries) ++offset[e.object + 1];
  int observed = 0;
  for (int o = 0; o < raw.num_objects(); ++o) {
    observed += offset[o + 1] > 0;
    offset[o + 1] += offset[o];
  }
  std::vector<Observation> grouped(entries.size());
  std::vector<int> orig(entries.size());
  {
    std::vector<int> fill(offset.begin(), offset.end() - 1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const int g = fill[entries[i].object]++;
      grouped[g] = entries[i];
      orig[g] = static_cast<int>(i);
    }
  }

  std::vector<int> pair_count(np, 0);
  for (const Observation& e : entries) ++pair_count[raw.pair_index(e.model, e.cls)];
  std::vector<std::vector<int>> pair_entries(np);
  for (int p = 0; p < np; ++p) pair_entries[p].reserve(pair_count[p]);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    pair_entries[raw.pair_index(entries[i].model, entries[i].cls)].push_back(static_cast<int>(i));
  }

  // Fast path: the ε values at which each condition is used, as a bit mask.
  // An entry survives at every ε that uses none of its firing conditions.
  const bool tabled = K <= 64;
  const std::uint64_t all_k = K == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << K) - 1;
  std::vector<std::vector<std::uint64_t>> used_at(np);
  if (tabled) {
    for (int p = 0; p < np; ++p) {
      used_at[p].assign(distinct[p].size(), 0);
      for (std::size_t k = 0; k < K; ++k) {
        for (int j : uses(p, k)) used_at[p][j] |= std::uint64_t{1} << k;
      }
    }
  }

  // Survival of raw entry i at eps[k]: bit k of keep_mask[i], or survives[i * K + k].
  std::vector<std::uint64_t> keep_mask(tabled ? entries.size() : 0);
  std::vector<char> survives(tabled ? 0 : entries.size() * K, 0);
  std::vector<std::vector<int>> batch_size(np, std::vector<int>(K, 0));
  std::vector<signed char> fires;
  std::vector<int> peer_cls(raw.num_models(), -1);  // class each model gives the object
  for (int o = 0; o < raw.num_objects(); ++o) {
    const std::span<const Observation> sib(grouped.data() + offset[o], offset[o + 1] - offset[o]);
    for (const Observation& s : sib) peer_cls[s.model] = s.cls;
    for (std::size_t g = offset[o]; g < static_cast<std::size_t>(offset[o + 1]); ++g) {
      const Observation& e = grouped[g];
      const std::size_t i = orig[g];
      const int p = raw.pair_index(e.model, e.cls);
      auto holds = [&](const Condition& cond) {
        switch (cond.kind) {
          case Condition::Kind::kDisagreeWith:
            return cond.model != e.model && cond.model >= 0 && cond.model < raw.num_models() &&
                   peer_cls[cond.model] >= 0 && peer_cls[cond.model] != e.cls;
          case Condition::Kind::kConfidenceBelow:
            return e.confidence < cond.threshold;
          default:
            return cond.fires(e, sib);
        }
      };
      if (tabled) {
        const std::vector<std::uint64_t>& used = used_at[p];
        std::uint64_t flagged = 0;
        for (std::size_t j = 0, n = used.size(); j < n; ++j) {
          if ((flagged | used[j]) != flagged && holds(distinct[p][j])) flagged |= used[j];
        }
        keep_mask[i] = all_k & ~flagged;
        for (std::uint64_t m = keep_mask[i]; m != 0; m &= m - 1) {
          ++batch_size[p][std::countr_zero(m)];
        }
        continue;
      }
      fires.assign(distinct[p].size(), -1);
      for (std::size_t k = 0; k < K; ++k) {
        bool flagged = false;
        for (int j : uses(p, k)) {
          if (fires[j] < 0) fires[j] = holds(distinct[p][j]);
          if (fires[j]) {
            flagged = true;
            break;
          }
        }
        survives[i * K + k] = !flagged;
        batch_size[p][k] += !flagged;
      }
    }
    for (const Observation& s : sib) peer_cls[s.model] = -1;
  }
  auto survive = [&](int i, std::size_t k) {
    return tabled ? ((keep_mask[i] >> k) & 1) != 0 : survives[i * K + k] != 0;
  };

  std::vector<char> conflict(static_cast<std::size_t>(nc) * nc, 0);
  for (auto [a, b] : domain.ic_pairs) conflict[a * nc + b] = conflict[b * nc + a] = 1;
  // With at most 64 classes, the classes selected for an object form a bit mask.
  const bool class_masks = nc <= 64;
  std::vector<std::uint64_t> conflict_mask(nc, 0), present(class_masks ? raw.num_objects() : 0, 0);
  for (auto [a, b] : domain.ic_pairs) {
    if (!class_masks) break;
    conflict_mask[a] |= std::uint64_t{1} << b;
    conflict_mask[b] |= std::uint64_t{1} << a;
  }

  std::vector<int> atom_count(static_cast<std::size_t>(raw.num_objects()) * nc, 0);
  long long violations = 0;

  HsResult result;
  std::vector<long long> added(K);
  for (const ModelClass& pc : pair_order(raw.num_models(), nc, config)) {
    const int p = raw.pair_index(pc.model, pc.cls);
    const int c = pc.cls;
    // Conflicts each ε-batch of this pair would add to the selection.
    std::fill(added.begin(), added.end(), 0);
    for (int i : pair_entries[p]) {
      const std::size_t base = static_cast<std::size_t>(entries[i].object) * nc;
      if (atom_count[base + c] > 0) continue;
      long long v = 0;
      if (class_masks) {
        v = std::popcount(present[entries[i].object] & conflict_mask[c]);
      } else {
        for (int c2 = 0; c2 < nc; ++c2) v += conflict[c * nc + c2] && atom_count[base + c2] > 0;
      }
      if (v == 0) continue;
      if (tabled) {
        for (std::uint64_t m = keep_mask[i]; m != 0; m &= m - 1) added[std::countr_zero(m)] += v;
      } else {
        for (std::size_t k = 0; k < K; ++k) {
          if (survives[i * K + k]) added[k] += v;
        }
      }
    }

    const std::size_t current = result.selected.size();
    std::size_t best_size = current;
    int best_k = -1;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t cand_size = current + batch_size[p][k];
      if (cand_size <= best_size) continue;
      if (!within_delta(inc_from_violations(violations + added[k], observed, domain),
                        config.delta)) {
        continue;
      }
      best_size = cand_size;
      best_k = static_cast<int>(k);
    }

    HsStep step{pc.model, pc.cls, std::nullopt, 0, 0, 0.0};
    if (best_k >= 0) {
      violations += added[best_k];
      for (int i : pair_entries[p]) {
        if (!survive(i, best_k)) continue;
        ++atom_count[static_cast<std::size_t>(entries[i].object) * nc + pc.cls];
        if (class_masks) present[entries[i].object] |= std::uint64_t{1} << pc.cls;
        result.selected.push_back(entries[i]);
      }
      step.chosen_epsilon = eps[best_k];
      step.added = batch_size[p][best_k];
    }
    step.size_after = static_cast<int>(result.selected.size());
    step.inc_after = inc_from_violations(violations, observed, domain);
    result.trace.push_back(step);
  }
  return result;
}

}  // namespace abfuse
