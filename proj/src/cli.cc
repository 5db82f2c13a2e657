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

#include "abfuse/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "abfuse/baselines.hpp"
#include "abfuse/model_io.hpp"
#include "abfuse/pipeline.hpp"
#include "abfuse/serialization.hpp"
#include "abfuse/synthgen.hpp"
#include "json.hpp"

namespace abfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string grid_text(const std::vector<double>& g) {
  std::ostringstream os;
  for (std::size_t i = 0; i < g.size(); ++i) os << (i ? "," : "") << g[i];
  return os.str();
}

const std::string kDefaultGridText = grid_text(kDefaultGrid);

struct LoadedSplit {
  ObservationSet observations;
  std::vector<int> gt;
};

LoadedSplit load_split(const std::string& manifest, double primary_iou, std::ostream& err) {
  const Dataset data = load_dataset(manifest);
  MatchResult match = build_observations(data, primary_iou);
  if (!match.uncovered_objects.empty()) {
    err << "note: " << match.uncovered_objects.size() << " of "
        << match.observations.num_objects() << " objects in " << manifest
        << " have no prediction\n";
  }
  LoadedSplit s{std::move(match.observations), {}};
  s.gt = ground_truth_labels(data, s.observations);
  return s;
}

// Domain reordered to the dataset's class order.
Domain align_domain(const Domain& d, const std::vector<std::string>& classes) {
  const std::set<std::string> a(d.classes.begin(), d.classes.end());
  const std::set<std::string> b(classes.begin(), classes.end());
  if (a != b) throw InputError("domain classes do not match the dataset classes");
  Domain out = d;
  out.classes = classes;
  out.ic_pairs.clear();
  auto index_of = [&](const std::string& name) {
    return static_cast<int>(std::find(classes.begin(), classes.end(), name) - classes.begin());
  };
  for (auto [x, y] : d.ic_pairs) out.add_ic(index_of(d.classes[x]), index_of(d.classes[y]));
  return out;
}

struct DomainFlags {
  std::string path;
  std::string normalizer;
  std::optional<bool> directed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--domain", path, "Domain config (JSON); defaults to $" +
                                          std::string(kDomainEnvVar) +
                                          " or all-pairs conflicts");
    cmd->add_option("--normalizer", normalizer, "per_object | per_ground_rule");
    cmd->add_option("--directed", directed, "Count both directed ground rules per conflict");
  }

  Domain resolve(const std::vector<std::string>& classes) const {
    std::string file = path;
    if (file.empty()) {
      if (const char* env = std::getenv(kDomainEnvVar)) file = env;
    }
    Domain d = file.empty() ? Domain::all_pairs(classes) : align_domain(read_domain(file), classes);
    if (!normalizer.empty()) d.normalizer = parse_normalizer(normalizer);
    if (directed) d.directed_ground_rules = *directed;
    return d;
  }
};

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0,1]");
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

std::string observation_digest(const ObservationSet& obs) {
  std::ostringstream os;
  for (const auto& o : obs.objects()) os << o << ';';
  for (const auto& m : obs.models()) os << m << ';';
  for (const auto& c : obs.classes()) os << c << ';';
  for (const Observation& e : obs.entries()) {
    os << e.object << ',' << e.model << ',' << e.cls << ',' << e.confidence << ';';
  }
  return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"abfuse: abductive fusion of multi-model predictions"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic train/test dataset");
  std::string gen_preset, gen_scenario, gen_out;
  std::uint64_t gen_seed = 0;
  std::optional<int> gen_train, gen_test;
  gen->add_option("--preset", gen_preset, "UM_k | BM_k | MM_k | AM_k | HUM_k");
  gen->add_option("--scenario", gen_scenario, "Scenario config (JSON)");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--n-train", gen_train);
  gen->add_option("--n-test", gen_test);
  gen->add_option("--out", gen_out, "Output directory")->required();

  // learn
  auto* learn = app.add_subcommand("learn", "Learn error-detection rules over an epsilon grid");
  std::string learn_train, learn_out, learn_grid = kDefaultGridText;
  double learn_iou = kDefaultPrimaryIou;
  learn->add_option("--train", learn_train, "Training dataset manifest")->required();
  learn->add_option("--epsilon-grid", learn_grid, "Comma-separated epsilon values");
  learn->add_option("--primary-iou", learn_iou);
  learn->add_option("--out", learn_out, "Rule file (JSON lines)")->required();

  // abduce
  auto* abduce = app.add_subcommand("abduce", "Abduce one label set with IP or HS");
  std::string ab_data, ab_rules, ab_solver = "ip", ab_out, ab_eps_set, ab_tb = "on";
  double ab_delta = 0.1, ab_eps = 0.1, ab_iou = kDefaultPrimaryIou;
  bool ab_dump = false, ab_shuffle = false;
  std::uint64_t ab_seed = 0;
  DomainFlags ab_domain;
  abduce->add_option("--data", ab_data, "Dataset manifest")->required();
  abduce->add_option("--rules", ab_rules, "Rule file from `learn`")->required();
  abduce->add_option("--solver", ab_solver, "ip | hs")->check(CLI::IsMember({"ip", "hs"}));
  abduce->add_option("--delta", ab_delta, "Maximum inconsistency");
  abduce->add_option("--epsilon", ab_eps, "EDR epsilon (ip)");
  abduce->add_option("--epsilon-set", ab_eps_set, "Comma-separated epsilon set (hs); default: rule grid");
  abduce->add_option("--tie-break", ab_tb, "on | off")->check(CLI::IsMember({"on", "off"}));
  abduce->add_option("--primary-iou", ab_iou);
  abduce->add_flag("--dump-instance", ab_dump, "Write the IP instance and solution dumps");
  abduce->add_flag("--shuffle-pairs", ab_shuffle, "Seeded random (f, c) order for hs");
  abduce->add_option("--seed", ab_seed);
  abduce->add_option("--out", ab_out, "Output directory")->required();
  ab_domain.attach(abduce);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run methods over a delta x epsilon grid");
  std::string sw_train, sw_test, sw_rules, sw_out, sw_methods = "ip,ip_tb,hs,hs_tb,mv,best,avg";
  std::string sw_dgrid = kDefaultGridText, sw_egrid = kDefaultGridText;
  int sw_repeats = 1, sw_jobs = 1;
  std::uint64_t sw_seed = 0;
  double sw_iou = kDefaultPrimaryIou;
  bool sw_per_repeat = false, sw_shuffle = false;
  DomainFlags sw_domain;
  sweep->add_option("--train", sw_train, "Training manifest (rules are learned on it)");
  sweep->add_option("--rules", sw_rules, "Pre-learned rule file instead of --train");
  sweep->add_option("--test", sw_test, "Test manifest")->required();
  sweep->add_option("--delta-grid", sw_dgrid);
  sweep->add_option("--epsilon-grid", sw_egrid);
  sweep->add_option("--methods", sw_methods);
  sweep->add_option("--repeats", sw_repeats);
  sweep->add_option("--seed", sw_seed);
  sweep->add_option("--jobs", sw_jobs);
  sweep->add_option("--primary-iou", sw_iou);
  sweep->add_flag("--per-repeat", sw_per_repeat, "One CSV row per repeat");
  sweep->add_flag("--shuffle-pairs", sw_shuffle, "Seeded random (f, c) order for hs");
  sweep->add_option("--out", sw_out, "Output directory")->required();
  sw_domain.attach(sweep);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a labels file against ground truth");
  std::string ev_labels, ev_data, ev_out;
  double ev_iou = kDefaultPrimaryIou;
  DomainFlags ev_domain;
  eval->add_option("--labels", ev_labels)->required();
  eval->add_option("--data", ev_data, "Dataset manifest")->required();
  eval->add_option("--primary-iou", ev_iou);
  eval->add_option("--out", ev_out, "Metrics file; stdout when omitted");
  ev_domain.attach(eval);

  // baseline
  auto* base = app.add_subcommand("baseline", "Majority vote, best model or model average");
  std::string bl_method, bl_data, bl_out;
  double bl_iou = kDefaultPrimaryIou;
  base->add_option("--method", bl_method, "mv | best | avg")
      ->required()
      ->check(CLI::IsMember({"mv", "best", "avg"}));
  base->add_option("--data", bl_data, "Dataset manifest")->required();
  base->add_option("--primary-iou", bl_iou);
  base->add_option("--out", bl_out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (gen->parsed()) {
      if (gen_preset.empty() == gen_scenario.empty()) {
        throw InputError("give exactly one of --preset or --scenario");
      }
      ShiftScenario s = gen_scenario.empty() ? preset_scenario(gen_preset, gen_seed)
                                             : read_scenario(gen_scenario);
      if (gen->count("--seed")) s.seed = gen_seed;
      if (gen_train) s.n_train = *gen_train;
      if (gen_test) s.n_test = *gen_test;
      const SyntheticDataset data = generate(s);
      write_split(data.train, fs::path(gen_out) / "train");
      write_split(data.test, fs::path(gen_out) / "test");
      auto dom = open_out(fs::path(gen_out) / "domain.json");
      write_domain(dom, Domain::all_pairs(s.classes));
      out << "wrote " << gen_out << " (" << s.n_train << " train, " << s.n_test
          << " test objects)\n";
    } else if (learn->parsed()) {
      check_unit(learn_iou, "--primary-iou");
      const auto grid = parse_grid(learn_grid);
      const LoadedSplit train = load_split(learn_train, learn_iou, err);
      const RuleSet rules = learn_rule_set(train.observations, train.gt,
                                           generate_candidates(train.observations), grid);
      auto f = open_out(learn_out);
      write_rule_set(f, rules, train.observations.models(), train.observations.classes());
      out << "wrote " << learn_out << "\n";
    } else if (abduce->parsed()) {
      check_unit(ab_delta, "--delta");
      check_unit(ab_eps, "--epsilon");
      const LoadedSplit data = load_split(ab_data, ab_iou, err);
      const ObservationSet& obs = data.observations;
      const RuleSet rules = read_rule_set(ab_rules, obs.models(), obs.classes());
      const Domain domain = ab_domain.resolve(obs.classes());
      const bool tb = ab_tb == "on";
      const fs::path dir(ab_out);
      fs::create_directories(dir);

      AbductionOutput result;
      if (ab_solver == "ip") {
        result = run_ip(obs, rules, ab_eps, ab_delta, domain, tb);
        if (ab_dump) {
          const IpInstance inst = build_instance(apply_rules(obs, rules, ab_eps), domain, ab_delta);
          auto fi = open_out(dir / "instance.txt");
          dump_instance(fi, inst);
          auto fsol = open_out(dir / "solution.txt");
          dump_solution(fsol, inst, *result.ip);
        }
      } else {
        HsConfig cfg;
        cfg.delta = ab_delta;
        cfg.epsilon_set = ab_eps_set.empty() ? rules.epsilon_grid() : parse_grid(ab_eps_set);
        cfg.shuffle_pairs = ab_shuffle;
        cfg.seed = ab_seed;
        result = run_hs(obs, rules, cfg, domain, tb);
        auto ft = open_out(dir / "trace.jsonl");
        write_trace(ft, result.hs->trace, obs.models(), obs.classes());
      }
      if (!result.feasible) {
        err << "infeasible: no hypothesis covers every object within delta " << ab_delta << "\n";
        return kExitInfeasible;
      }
      auto fl = open_out(dir / "labels.jsonl");
      write_labels(fl, result.labels, obs);
      Metrics m = score_output(result, data.gt, tb);
      m.runtime_per_object = result.seconds / std::max(1, obs.num_objects());
      auto fm = open_out(dir / "metrics.json");
      write_metrics(fm, m);
      out << "objects " << obs.num_objects() << " atoms " << result.atoms.size() << " f1 "
          << m.f1 << " accuracy " << m.accuracy << "\n";
    } else if (sweep->parsed()) {
      if (sw_train.empty() == sw_rules.empty()) {
        throw InputError("give exactly one of --train or --rules");
      }
      SweepOptions opt;
      opt.methods = parse_methods(sw_methods);
      opt.delta_grid = parse_grid(sw_dgrid);
      opt.epsilon_grid = parse_grid(sw_egrid);
      opt.repeats = sw_repeats;
      opt.seed = sw_seed;
      opt.jobs = sw_jobs;
      opt.shuffle_hs_pairs = sw_shuffle;
      if (sw_repeats < 1) throw InputError("--repeats must be >= 1");
      if (sw_jobs < 1) throw InputError("--jobs must be >= 1");

      SweepInputs in;
      LoadedSplit test = load_split(sw_test, sw_iou, err);
      in.domain = sw_domain.resolve(test.observations.classes());
      std::optional<RuleSet> rules;
      std::string train_digest;
      if (!sw_train.empty()) {
        LoadedSplit train = load_split(sw_train, sw_iou, err);
        train_digest = observation_digest(train.observations);
        in.train = std::move(train.observations);
        in.train_gt = std::move(train.gt);
      } else {
        rules = read_rule_set(sw_rules, test.observations.models(), test.observations.classes());
      }
      const std::string test_digest = observation_digest(test.observations);
      in.test = std::move(test.observations);
      in.test_gt = std::move(test.gt);

      const SweepGrid grid = run_sweep(in, opt, rules ? &*rules : nullptr);
      const fs::path dir(sw_out);
      auto csv = open_out(dir / "sweep.csv");
      write_sweep_csv(csv, grid, sw_per_repeat);

      json manifest;
      manifest["seed"] = sw_seed;
      manifest["repeats"] = sw_repeats;
      manifest["delta_grid"] = opt.delta_grid;
      manifest["epsilon_grid"] = opt.epsilon_grid;
      std::vector<std::string> methods;
      for (Method m : opt.methods) methods.push_back(to_string(m));
      manifest["methods"] = methods;
      manifest["normalizer_mode"] = to_string(in.domain.normalizer);
      manifest["dataset_hash"] = fnv1a_hex(train_digest + "|" + test_digest);
      manifest["test"] = sw_test;
      if (!sw_train.empty()) manifest["train"] = sw_train;
      if (!sw_rules.empty()) manifest["rules"] = sw_rules;
      auto mf = open_out(dir / "manifest.json");
      mf << manifest.dump(2) << "\n";

      int ok = 0;
      for (const auto& c : grid.cells) ok += c.feasible;
      out << "cells " << grid.cells.size() << " feasible " << ok << "\n";
      if (ok == 0) return kExitInfeasible;
    } else if (eval->parsed()) {
      check_unit(ev_iou, "--primary-iou");
      const LoadedSplit data = load_split(ev_data, ev_iou, err);
      const auto labels = read_labels(ev_labels, data.observations);
      std::map<int, int> per_object;
      bool single = true;
      std::vector<Atom> atoms;
      for (const auto& l : labels) {
        atoms.push_back({l.cls, l.object});
        single &= per_object.emplace(l.object, l.cls).second;
      }
      Metrics m = single ? score_labels(per_object, data.gt) : score_atoms(atoms, data.gt);
      if (!single) {
        const Domain domain = ev_domain.resolve(data.observations.classes());
        m.inconsistency = count_inc(atoms, domain, data.observations.num_observed_objects());
      }
      if (ev_out.empty()) {
        write_metrics(out, m);
      } else {
        auto f = open_out(ev_out);
        write_metrics(f, m);
      }
    } else if (base->parsed()) {
      check_unit(bl_iou, "--primary-iou");
      const LoadedSplit data = load_split(bl_data, bl_iou, err);
      const ObservationSet& obs = data.observations;
      const fs::path dir(bl_out);
      fs::create_directories(dir);
      std::vector<Metrics> per_model;
      for (int f = 0; f < obs.num_models(); ++f) {
        per_model.push_back(score_labels(model_labels(obs, f), data.gt));
      }
      Metrics m;
      std::map<int, int> labels;
      int model_for_labels = -1;
      if (bl_method == "mv") {
        labels = majority_vote(obs);
        m = score_labels(labels, data.gt);
      } else if (bl_method == "best") {
        model_for_labels = best_individual(per_model);
        labels = model_labels(obs, model_for_labels);
        m = per_model[model_for_labels];
        out << "best model " << obs.models()[model_for_labels] << "\n";
      } else {
        m = average_models(per_model);
      }
      if (bl_method != "avg") {
        // Confidence and model of the vote that carries the label.
        std::vector<LabelCandidate> rows;
        for (const auto& [object, cls] : labels) {
          LabelCandidate best{object, cls, -1, -1.0};
          for (const Observation& e : obs.entries()) {
            if (e.object != object || e.cls != cls) continue;
            if (model_for_labels >= 0 && e.model != model_for_labels) continue;
            const LabelCandidate cand{object, cls, e.model, e.confidence};
            if (best.model < 0 || tiebreak_prefers(cand, best)) best = cand;
          }
          rows.push_back(best);
        }
        auto fl = open_out(dir / "labels.jsonl");
        write_labels(fl, rows, obs);
      }
      auto fm = open_out(dir / "metrics.json");
      write_metrics(fm, m);
      out << bl_method << " f1 " << m.f1 << " accuracy " << m.accuracy << "\n";
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return exit_code;
}

}  // namespace abfuse
