// ikform: scaling benchmarks, gradient checks and single-problem solves.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ikform/bench.hpp"
#include "ikform/formulation.hpp"
#include "ikform/sampling.hpp"
#include "ikform/solver.hpp"

namespace {

using namespace ikform;

struct SolverFlags {
  double feasibility_tol = SolverOptions{}.feasibility_tol;
  double optimality_tol = SolverOptions{}.optimality_tol;
  int max_outer = SolverOptions{}.max_outer;
  int max_inner = SolverOptions{}.max_inner;
  double timeout = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--feasibility-tol", feasibility_tol, "Max constraint violation accepted as feasible");
    app->add_option("--optimality-tol", optimality_tol, "Projected-gradient tolerance");
    app->add_option("--max-outer", max_outer, "Outer (multiplier) iterations");
    app->add_option("--max-inner", max_inner, "Inner quasi-Newton iterations per outer iteration");
    app->add_option("--timeout", timeout, "Per-solve wall-clock limit in seconds (0 = none)");
  }

  SolverOptions options(SolverOptions base = {}) const {
    base.feasibility_tol = feasibility_tol;
    base.optimality_tol = optimality_tol;
    base.max_outer = max_outer;
    base.max_inner = max_inner;
    base.timeout_s = timeout;
    base.validate();
    return base;
  }
};

struct OutputFlags {
  std::string out = "-";
  std::string format = "csv";
  bool record_time = false;
  bool quiet = false;
  std::size_t budget = BenchOptions{}.sample_budget;

  void attach(CLI::App* app) {
    app->add_option("--out", out, "Output path ('-' for stdout)");
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--record-time", record_time, "Fill wall_time_s (output is then not reproducible)");
    app->add_flag("--quiet", quiet, "Do not print the summary table to stderr");
    app->add_option("--budget", budget, "Sampling-baseline budget per target");
  }
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const int v = std::stoi(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad integer '" + item + "' in list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

void print_summary(const std::vector<TrialRecord>& records) {
  std::fprintf(stderr, "%-16s %6s %-10s %7s %9s %12s %12s\n", "experiment", "n", "method", "trials", "success",
               "median_iter", "mean_cost");
  for (const auto& s : summarize(records)) {
    std::fprintf(stderr, "%-16s %6d %-10s %7d %9.3f %12.1f %12.6g\n", s.experiment.c_str(), s.n_links,
                 s.method.c_str(), s.trials, s.success_rate, s.median_iterations, s.mean_cost);
  }
}

void finish(const std::vector<TrialRecord>& records, const OutputFlags& out) {
  emit(records, output_format_from_string(out.format), out.out);
  if (!out.quiet) print_summary(records);
}

BenchOptions bench_options(const SolverFlags& sf, const OutputFlags& of) {
  BenchOptions o;
  o.solver = sf.options();
  o.sample_budget = of.budget;
  o.record_time = of.record_time;
  return o;
}

int run_solve(const std::string& path, const std::string& method, std::uint64_t seed, const SolverFlags& sf,
              std::size_t budget) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  const std::string base_dir = std::filesystem::path(path).parent_path().string();
  const IKProblem problem = problem_from_json(j, base_dir.empty() ? "." : base_dir);
  SolverOptions opts = sf.options();
  if (j.contains("solver")) opts = j.at("solver").get<SolverOptions>();

  const auto map = make_ik_map(problem);
  nlohmann::json out{{"method", method}};
  std::vector<double> q;
  if (method == "sampling") {
    const std::size_t b = j.value("budget", budget);
    const SampleReport rep = sample_ik(problem, SamplePlan::from_budget(*map, b));
    out["evaluated"] = rep.evaluated;
    out["feasible_samples"] = rep.feasible;
    if (!rep.best) {
      out["status"] = "no-solution";
      std::cout << out.dump(2) << '\n';
      return 1;
    }
    q = rep.best->q;
    out["status"] = "solved";
    out["branch"] = rep.best->branch.label();
    out["free"] = rep.best->free;
    out["cost"] = rep.best->cost;
  } else {
    std::vector<double> q0;
    if (j.contains("initial_guess")) {
      q0 = j.at("initial_guess").get<std::vector<double>>();
      if (q0.size() != problem.num_joints()) throw std::invalid_argument("initial_guess has the wrong length");
    } else {
      auto rng = trial_rng(seed, "solve", static_cast<int>(problem.num_joints()), 0);
      std::uniform_real_distribution<double> u(-M_PI, M_PI);
      q0.resize(problem.num_joints());
      for (auto& v : q0) v = u(rng);
    }
    SolveResult res;
    std::optional<NLProgram> prog;
    if (method == "old") {
      prog = build_old(problem);
      res = solve(*prog, q0, opts);
    } else {
      const MatchedGuess m = match_initial_guess(q0, *map);
      Branch branch = m.branch;
      if (j.contains("branch")) branch = Branch(j.at("branch").get<std::vector<int>>());
      prog = build_new(problem, *map, branch);
      auto x0 = new_program_point(m);
      unwrap_toward(x0, problem.target_params(), *map);
      res = solve(*prog, x0, opts);
      out["branch"] = branch.label();
      out["x"] = res.x_star;
    }
    q = prog->joints(res.x_star);
    out["status"] = to_string(res.status);
    out["optimal"] = res.optimal;
    out["cost"] = res.cost;
    out["outer_iterations"] = res.outer_iterations;
    out["inner_iterations"] = res.inner_iterations_total;
  }
  const JointCheck check = check_joints(problem, q);
  out["q"] = q;
  out["max_violation"] = check.max();
  std::cout << out.dump(2) << '\n';
  return out["status"] == "solved" && check.max() <= kSuccessTol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse kinematics in joint space versus an analytic-IK reparameterization"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Run a scaling experiment and emit per-trial records");
  bench->require_subcommand(1);

  SolverFlags sf2, sf3, sfs, sf_solve;
  OutputFlags of2, of3, ofs;

  std::string n2 = "4,8,16,32";
  int targets2 = 100;
  std::uint64_t seed2 = 7;
  auto* b2 = bench->add_subcommand("2d", "Planar chains of n equal links");
  b2->add_option("--n", n2, "Comma-separated link counts (each >= 4)");
  b2->add_option("--targets", targets2, "Targets per link count");
  b2->add_option("--seed", seed2, "Base seed");
  sf2.attach(b2);
  of2.attach(b2);

  std::string n3 = "0,4,8,16";
  int targets3 = 50;
  std::uint64_t seed3 = 7;
  std::string mode3 = "feasibility";
  std::string gen3 = "fk";
  auto* b3 = bench->add_subcommand("3d", "Spatial arms with n extra joints before a 7-joint SRS tail");
  b3->add_option("--n", n3, "Comma-separated extra-joint counts (even, >= 0)");
  b3->add_option("--targets", targets3, "Targets per joint count");
  b3->add_option("--seed", seed3, "Base seed");
  b3->add_option("--mode", mode3, "feasibility or optimality")->check(CLI::IsMember({"feasibility", "optimality"}));
  b3->add_option("--target-gen", gen3, "fk (reachable by construction) or box (+-0.3 m, random orientation)")
      ->check(CLI::IsMember({"fk", "box"}));
  sf3.attach(b3);
  of3.attach(b3);

  int trials = 500;
  std::uint64_t seeds = 7;
  auto* bs = bench->add_subcommand("stability", "Support-polygon containment toy problem");
  bs->add_option("--trials", trials, "Random supports and query points");
  bs->add_option("--seed", seeds, "Base seed");
  sfs.attach(bs);
  ofs.attach(bs);

  auto* check = app.add_subcommand("check", "Validation harnesses");
  check->require_subcommand(1);
  int grad_points = 100;
  std::uint64_t grad_seed = 7;
  double grad_step = 1e-6;
  auto* cg = check->add_subcommand("gradients", "Autodiff versus central differences");
  cg->add_option("--points", grad_points, "Evaluation points per program family");
  cg->add_option("--seed", grad_seed, "Base seed");
  cg->add_option("--step", grad_step, "Finite-difference step");

  std::string problem_path, method = "new";
  std::uint64_t solve_seed = 7;
  std::size_t solve_budget = BenchOptions{}.sample_budget;
  auto* sv = app.add_subcommand("solve", "Solve one problem described in JSON");
  sv->add_option("--problem", problem_path, "Problem JSON file")->required();
  sv->add_option("--method", method, "old, new or sampling")->check(CLI::IsMember({"old", "new", "sampling"}));
  sv->add_option("--seed", solve_seed, "Seed for the random initial guess when the file has none");
  sv->add_option("--budget", solve_budget, "Sampling budget");
  sf_solve.attach(sv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*b2) {
      finish(run_2d_scaling(parse_int_list(n2), targets2, seed2, bench_options(sf2, of2)), of2);
    } else if (*b3) {
      finish(run_3d_scaling(parse_int_list(n3), targets3, seed3, mode3d_from_string(mode3), bench_options(sf3, of3),
                            targets3d_from_string(gen3)),
             of3);
    } else if (*bs) {
      auto records = run_stability_toy(seeds, trials, bench_options(sfs, ofs));
      finish(records, ofs);
      int scored = 0, agree = 0;
      for (const auto& r : records) {
        if (r.branch == "boundary") continue;
        ++scored;
        agree += stability_verdict_agrees(r) ? 1 : 0;
      }
      if (!ofs.quiet) {
        std::fprintf(stderr, "verdict agreement outside the boundary band: %d/%d\n", agree, scored);
      }
    } else if (*cg) {
      bool ok = true;
      for (const auto& f : gradient_validation(grad_points, grad_seed, grad_step)) {
        const bool pass = f.max_rel_error < 1e-4;
        ok = ok && pass;
        std::printf("%-12s points=%d max_rel_error=%.3e %s\n", f.family.c_str(), f.points, f.max_rel_error,
                    pass ? "ok" : "FAIL");
      }
      return ok ? 0 : 1;
    } else if (*sv) {
      return run_solve(problem_path, method, solve_seed, sf_solve, solve_budget);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ikform: %s\n", e.what());
    return 2;
  }
  return 0;
}
