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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "abfuse/deduction.hpp"
#include "abfuse/edr.hpp"

namespace abfuse {

// Binary program over the elimination variables Elim[f][c]:
//
//   max  Σ A[c][ω]
//   s.t. X[ω][f][c] ≤ 1 − Elim[f][c]
//        X[ω][f][c] · pred[f][c][ω] ≤ A[c][ω]
//        A[c][ω] ≤ Σ_f X[ω][f][c] · pred[f][c][ω]
//        A[c][ω] + A[c'][ω] − 1 ≤ Con[ω][(c, c')]       for {c, c'} ∈ IC
//        Σ_c A[c][ω] ≥ 1                                 for coverable ω
//        Σ Con ≤ budget
//
// An object is considered for (f, c) exactly when the pair is accepted, i.e.
// X[ω][f][c] = pred[f][c][ω] · (1 − Elim[f][c]), so A is the logical OR of the
// accepted supports and the objective equals Pred(H) of the fixpoint.
struct IpInstance {
  int num_objects = 0;
  int num_models = 0;
  int num_classes = 0;
  std::vector<std::pair<int, int>> ic_pairs;
  // Objects with pred[f][c][ω] = 1, sorted; indexed by pair f * C + c.
  std::vector<std::vector<int>> support;
  std::vector<char> coverable;  // per object
  long long delta_budget = 0;

  // Optional names, used only by dumps.
  std::vector<std::string> object_names, model_names, class_names;

  int num_pairs() const { return num_models * num_classes; }
  int pair_index(int model, int cls) const { return model * num_classes + cls; }
  bool pred(int model, int cls, int object) const;
};

// Constants from the surviving observations; budget from `delta` through the
// same normalisation as count_inc over the observed objects.
IpInstance build_instance(const FilteredObservations& obs, const Domain& domain,
                          double delta);

enum class IpStatus { kOptimal, kInfeasible };

struct IpSolution {
  IpStatus status = IpStatus::kInfeasible;
  std::vector<char> elim;        // per pair
  std::vector<Atom> assigned;    // A = 1, sorted
  std::vector<Violation> conflicts;  // Con = 1, sorted
  long long objective = 0;
  std::int64_t nodes = 0;        // search nodes visited

  int num_eliminated() const;
  Hypothesis hypothesis(int num_models, int num_classes) const;
};

// Exact depth-first branch and bound on the Elim variables. Among optimal
// hypotheses the one with the fewest eliminations wins, then the
// lexicographically smallest Elim vector in (f, c) order.
IpSolution solve(const IpInstance& instance);

inline constexpr int kBruteForceMaxPairs = 12;

// Enumerates all 2^(F·C) Elim vectors with the same tie rule as solve().
// Throws InputError above kBruteForceMaxPairs pairs.
IpSolution brute_force_optimal(const IpInstance& instance);

// A and Con implied by an Elim vector (no feasibility check).
IpSolution evaluate_elim(const IpInstance& instance, const std::vector<char>& elim);

// Textual dumps for debugging and reproduction.
void dump_instance(std::ostream& os, const IpInstance& instance);
void dump_solution(std::ostream& os, const IpInstance& instance,
                   const IpSolution& solution);

}  // namespace abfuse
