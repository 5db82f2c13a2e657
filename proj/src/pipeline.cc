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

#include "abfuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "abfuse/baselines.hpp"

namespace abfuse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::map<int, int> as_label_map(const std::vector<LabelCandidate>& labels) {
  std::map<int, int> m;
  for (const auto& l : labels) m.emplace(l.object, l.cls);
  return m;
}

}  // namespace

std::vector<LabelCandidate> tiebroken(const std::vector<LabelCandidate>& candidates) {
  std::vector<LabelCandidate> out;
  for (const auto& [object, cand] : apply_tiebreaker(candidates)) out.push_back(cand);
  return out;
}

AbductionOutput run_ip(const ObservationSet& raw, const RuleSet& rules, double epsilon,
                       double delta, const Domain& domain, bool tie_break) {
  const auto start = Clock::now();
  AbductionOutput out;
  const FilteredObservations filtered = apply_rules(raw, rules, epsilon);
  const IpInstance instance = build_instance(filtered, domain, delta);
  IpSolution solution = solve(instance);
  if (solution.status == IpStatus::kInfeasible) {
    out.feasible = false;
  } else {
    out.atoms = solution.assigned;
    out.labels = ip_candidates(solution, filtered.surviving);
    if (tie_break) out.labels = tiebroken(out.labels);
    out.inconsistency = inc_from_violations(static_cast<long long>(solution.conflicts.size()),
                                            filtered.num_observed_objects(), domain);
  }
  out.ip = std::move(solution);
  out.seconds = seconds_since(start);
  return out;
}

AbductionOutput run_hs(const ObservationSet& raw, const RuleSet& rules,
                       const HsConfig& config, const Domain& domain, bool tie_break) {
  const auto start = Clock::now();
  AbductionOutput out;
  HsResult result = heuristic_search(raw, config, rules, domain);
  out.atoms = result.atoms();
  out.labels = hs_candidates(result);
  if (tie_break) out.labels = tiebroken(out.labels);
  out.inconsistency = result.trace.empty() ? 0.0 : result.trace.back().inc_after;
  out.hs = std::move(result);
  out.seconds = seconds_since(start);
  return out;
}

Metrics score_output(const AbductionOutput& out, const std::vector<int>& gt,
                     bool tie_break) {
  Metrics m;
  if (tie_break) {
    m = score_labels(as_label_map(out.labels), gt);
  } else {
    m = score_atoms(out.atoms, gt);
    m.inconsistency = out.inconsistency;
  }
  return m;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kIp: return "ip";
    case Method::kIpTb: return "ip_tb";
    case Method::kHs: return "hs";
    case Method::kHsTb: return "hs_tb";
    case Method::kMv: return "mv";
    case Method::kBest: return "best";
    case Method::kAvg: return "avg";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  for (Method m : {Method::kIp, Method::kIpTb, Method::kHs, Method::kHsTb, Method::kMv,
                   Method::kBest, Method::kAvg}) {
    if (to_string(m) == text) return m;
  }
  throw InputError("unknown method '" + text + "'");
}

namespace {
std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}
}  // namespace

std::vector<Method> parse_methods(const std::string& comma_list) {
  std::vector<Method> out;
  for (const auto& item : split_commas(comma_list)) out.push_back(parse_method(item));
  if (out.empty()) throw InputError("no methods given");
  return out;
}

std::vector<double> parse_grid(const std::string& comma_list) {
  std::vector<double> out;
  for (const auto& item : split_commas(comma_list)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("bad grid value '" + item + "'");
    }
    if (used != item.size()) throw InputError("bad grid value '" + item + "'");
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("grid value outside [0,1]: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty grid");
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

Metrics mean_of(const std::vector<Metrics>& runs) {
  Metrics m = average_models(runs);
  if (!runs.empty()) m.n_objects = runs.front().n_objects;
  return m;
}

struct CellJob {
  double delta;
  double epsilon;
};

std::vector<SweepCell> run_cell(const SweepInputs& in, const SweepOptions& opt,
                                const RuleSet& rules, const CellJob& job) {
  const auto wants = [&](Method m) {
    return std::find(opt.methods.begin(), opt.methods.end(), m) != opt.methods.end();
  };
  const int n_objects = std::max(1, in.test.num_objects());
  std::map<Method, std::vector<Metrics>> runs;
  std::map<Method, bool> feasible;
  long long ip_objective = -1;

  for (int r = 0; r < opt.repeats; ++r) {
    if (wants(Method::kIp) || wants(Method::kIpTb)) {
      AbductionOutput out = run_ip(in.test, rules, job.epsilon, job.delta, in.domain, false);
      const auto tb_start = Clock::now();
      const auto labels = out.feasible ? tiebroken(out.labels) : std::vector<LabelCandidate>{};
      const double tb_seconds = seconds_since(tb_start);
      feasible[Method::kIp] = feasible[Method::kIpTb] = out.feasible;
      Metrics ip, ip_tb;
      ip.n_objects = ip_tb.n_objects = n_objects;
      if (out.feasible) {
        ip = score_output(out, in.test_gt, false);
        ip_tb = score_labels(as_label_map(labels), in.test_gt);
        ip_objective = out.ip->objective;
      }
      ip.runtime_per_object = out.seconds / n_objects;
      ip_tb.runtime_per_object = (out.seconds + tb_seconds) / n_objects;
      runs[Method::kIp].push_back(ip);
      runs[Method::kIpTb].push_back(ip_tb);
    }
    if (wants(Method::kHs) || wants(Method::kHsTb)) {
      HsConfig cfg;
      cfg.delta = job.delta;
      cfg.epsilon_set.clear();
      for (double e : rules.epsilon_grid()) {
        if (e <= job.epsilon + 1e-12) cfg.epsilon_set.push_back(e);
      }
      cfg.shuffle_pairs = opt.shuffle_hs_pairs;
      cfg.seed = opt.seed + static_cast<std::uint64_t>(r);
      // The fused labels need only the selection, not its atom set.
      const auto hs_start = Clock::now();
      HsResult result = heuristic_search(in.test, cfg, rules, in.domain);
      const double search_seconds = seconds_since(hs_start);
      const auto tb_start = Clock::now();
      const auto labels = tiebroken(hs_candidates(result));
      const double tb_seconds = seconds_since(tb_start);
      const auto atoms_start = Clock::now();
      AbductionOutput out;
      out.atoms = result.atoms();
      out.inconsistency = result.trace.empty() ? 0.0 : result.trace.back().inc_after;
      const double atoms_seconds = seconds_since(atoms_start);
      Metrics hs = score_output(out, in.test_gt, false);
      Metrics hs_tb = score_labels(as_label_map(labels), in.test_gt);
      hs.runtime_per_object = (search_seconds + atoms_seconds) / n_objects;
      hs_tb.runtime_per_object = (search_seconds + tb_seconds) / n_objects;
      runs[Method::kHs].push_back(hs);
      runs[Method::kHsTb].push_back(hs_tb);
    }
    if (wants(Method::kMv)) {
      const auto start = Clock::now();
      const auto labels = majority_vote(in.test);
      const double secs = seconds_since(start);
      Metrics m = score_labels(labels, in.test_gt);
      m.runtime_per_object = secs / n_objects;
      runs[Method::kMv].push_back(m);
    }
    if (wants(Method::kBest) || wants(Method::kAvg)) {
      const auto start = Clock::now();
      std::vector<Metrics> per_model;
      for (int f = 0; f < in.test.num_models(); ++f) {
        per_model.push_back(score_labels(model_labels(in.test, f), in.test_gt));
      }
      const double secs = seconds_since(start);
      for (auto& m : per_model) m.runtime_per_object = secs / in.test.num_models() / n_objects;
      if (wants(Method::kBest)) runs[Method::kBest].push_back(per_model[best_individual(per_model)]);
      if (wants(Method::kAvg)) runs[Method::kAvg].push_back(average_models(per_model));
    }
  }

  std::vector<SweepCell> cells;
  for (Method m : opt.methods) {
    SweepCell cell;
    cell.delta = job.delta;
    cell.epsilon = job.epsilon;
    cell.method = m;
    cell.feasible = feasible.count(m) ? feasible[m] : true;
    cell.per_repeat = runs[m];
    cell.mean = mean_of(cell.per_repeat);
    if (m == Method::kIp || m == Method::kIpTb) cell.ip_objective = ip_objective;
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace

SweepGrid run_sweep(const SweepInputs& inputs, const SweepOptions& options,
                    const RuleSet* rules) {
  if (options.delta_grid.empty() || options.epsilon_grid.empty()) {
    throw InputError("sweep grids must be non-empty");
  }
  if (options.repeats < 1) throw InputError("repeats must be >= 1");
  if (options.methods.empty()) throw InputError("no methods to sweep");
  for (double d : options.delta_grid) {
    if (!(d >= 0.0 && d <= 1.0)) throw InputError("delta outside [0,1]");
  }

  RuleSet learned;
  if (rules == nullptr) {
    learned = learn_rule_set(inputs.train, inputs.train_gt, generate_candidates(inputs.train),
                             options.epsilon_grid);
    rules = &learned;
  }
  for (double e : options.epsilon_grid) rules->epsilon_index(e);

  std::vector<CellJob> jobs;
  for (double d : options.delta_grid) {
    for (double e : options.epsilon_grid) jobs.push_back({d, e});
  }
  std::vector<std::vector<SweepCell>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = run_cell(inputs, options, *rules, jobs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepGrid grid;
  grid.deltas = options.delta_grid;
  grid.epsilons = options.epsilon_grid;
  for (auto& r : results) {
    for (auto& c : r) grid.cells.push_back(std::move(c));
  }
  return grid;
}

namespace {
void write_row(std::ostream& os, const SweepCell& c, const Metrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%g,%g,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6g,%d,%s\n", c.delta,
                c.epsilon, to_string(c.method).c_str(), m.precision, m.recall, m.f1,
                m.accuracy, m.inconsistency, m.runtime_per_object, m.n_objects,
                c.feasible ? "ok" : "infeasible");
  os << buf;
}
}  // namespace

void write_sweep_csv(std::ostream& os, const SweepGrid& grid, bool per_repeat) {
  os << "delta,epsilon,method,precision,recall,f1,accuracy,inconsistency,"
        "runtime_per_object,n_objects,status\n";
  for (const SweepCell& c : grid.cells) {
    if (per_repeat) {
      for (const Metrics& m : c.per_repeat) write_row(os, c, m);
    } else {
      write_row(os, c, c.mean);
    }
  }
}

}  // namespace abfuse
