#include "ikform/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ikform {

Mode3D mode3d_from_string(const std::string& s) {
  if (s == "feasibility") return Mode3D::feasibility;
  if (s == "optimality") return Mode3D::optimality;
  throw std::invalid_argument("unknown 3d mode '" + s + "' (expected feasibility or optimality)");
}

Targets3D targets3d_from_string(const std::string& s) {
  if (s == "fk") return Targets3D::fk;
  if (s == "box") return Targets3D::box;
  throw std::invalid_argument("unknown 3d target generator '" + s + "' (expected fk or box)");
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + s + "' (expected csv or json)");
}

std::mt19937_64 trial_rng(std::uint64_t seed, const std::string& experiment, int n, int target) {
  // FNV-1a keeps the experiment tag's contribution independent of the standard library.
  std::uint64_t tag = 1469598103934665603ULL;
  for (unsigned char c : experiment) {
    tag ^= c;
    tag *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(target)};
  return std::mt19937_64(seq);
}

void sort_records(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.experiment, a.n_links, a.target_id, a.method) <
           std::tie(b.experiment, b.n_links, b.target_id, b.method);
  });
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

std::vector<double> uniform_in_box(std::mt19937_64& rng, const std::vector<double>& lo,
                                   const std::vector<double>& hi) {
  std::vector<double> v(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) v[i] = uniform(rng, lo[i], hi[i]);
  return v;
}

/// Draws q0 until it is invertible by the IK map (never more than a handful of draws in practice).
std::pair<std::vector<double>, MatchedGuess> draw_matched_guess(std::mt19937_64& rng, const IKProblem& problem,
                                                                 const AnalyticIKMap& map) {
  const auto lo = problem.joint_lower();
  const auto hi = problem.joint_upper();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<double> q0(lo.size());
    for (std::size_t i = 0; i < q0.size(); ++i) q0[i] = uniform(rng, std::max(lo[i], -M_PI), std::min(hi[i], M_PI));
    try {
      auto m = match_initial_guess(q0, map);
      return {std::move(q0), std::move(m)};
    } catch (const SingularConfiguration&) {
    }
  }
  throw std::runtime_error("draw_matched_guess: could not draw an invertible initial configuration");
}

struct CellContext {
  std::string experiment;
  int n = 0;
  int target = 0;
  std::uint64_t seed = 0;
  const BenchOptions* opts = nullptr;
};

TrialRecord base_record(const CellContext& c, const std::string& method) {
  TrialRecord r;
  r.experiment = c.experiment;
  r.n_links = c.n;
  r.target_id = c.target;
  r.method = method;
  r.seed = c.seed;
  return r;
}

double problem_cost(const IKProblem& problem, std::span<const double> q) {
  if (!problem.cost) return 0.0;
  return joint_centering_cost(q, problem.cost->weight, std::span<const double>(problem.cost->q_nom));
}

TrialRecord solver_record(const CellContext& c, const std::string& method, const std::string& branch,
                          const IKProblem& problem, const NLProgram& prog, std::span<const double> x0) {
  TrialRecord r = base_record(c, method);
  r.branch = branch;
  const auto t0 = Clock::now();
  const SolveResult res = solve(prog, x0, c.opts->solver);
  if (c.opts->record_time) r.wall_time_s = seconds_since(t0);
  r.iterations = res.inner_iterations_total;
  r.status = to_string(res.status);
  try {
    const auto q = prog.joints(res.x_star);
    r.max_violation = check_joints(problem, q).max();
    r.cost = problem_cost(problem, q);
  } catch (const SingularConfiguration&) {
    r.max_violation = kInf;
    r.cost = std::nan("");
  }
  if (res.status == SolveStatus::solved && !(r.max_violation <= kSuccessTol)) r.status = kRecheckFailed;
  return r;
}

TrialRecord sampling_record(const CellContext& c, const IKProblem& problem, const AnalyticIKMap& map) {
  TrialRecord r = base_record(c, "sampling");
  const auto t0 = Clock::now();
  const auto plan = SamplePlan::from_budget(map, c.opts->sample_budget);
  const SampleReport rep = sample_ik_serial(problem, plan);
  if (c.opts->record_time) r.wall_time_s = seconds_since(t0);
  r.iterations = static_cast<long>(rep.evaluated);
  if (rep.best) {
    r.branch = rep.best->branch.label();
    r.cost = rep.best->cost;
    r.max_violation = check_joints(problem, rep.best->q).max();
    r.status = r.max_violation <= kSuccessTol ? "solved" : kRecheckFailed;
  } else {
    r.status = "no-solution";
    r.cost = std::nan("");
    r.max_violation = kInf;
  }
  return r;
}

/// Old, new and sampling records for one problem and a matched initial guess.
std::vector<TrialRecord> run_cell(const CellContext& c, const IKProblem& problem, std::mt19937_64& rng) {
  const auto map = make_ik_map(problem);
  const auto [q0, matched] = draw_matched_guess(rng, problem, *map);
  std::vector<TrialRecord> out;
  const NLProgram old_prog = build_old(problem);
  out.push_back(solver_record(c, "old", "", problem, old_prog, q0));
  const NLProgram new_prog = build_new(problem, *map, matched.branch);
  auto x0 = new_program_point(matched);
  unwrap_toward(x0, problem.target_params(), *map);
  out.push_back(solver_record(c, "new", matched.branch.label(), problem, new_prog, x0));
  out.push_back(sampling_record(c, problem, *map));
  return out;
}

/// Runs cell(i) for i in [0, count) on the worker pool, keeping results in index order.
template <class Fn>
std::vector<TrialRecord> run_cells(std::size_t count, Fn&& cell) {
  std::vector<std::vector<TrialRecord>> results(count);
  std::vector<std::exception_ptr> errors(count);
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    try {
      results[static_cast<std::size_t>(i)] = cell(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<TrialRecord> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  sort_records(out);
  return out;
}

/// Uniformly distributed rotation from a unit quaternion.
Pose3 random_orientation_pose(std::mt19937_64& rng, const Vec3<double>& position) {
  const double u1 = uniform(rng, 0.0, 1.0), u2 = uniform(rng, 0.0, 2.0 * M_PI), u3 = uniform(rng, 0.0, 2.0 * M_PI);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(u2), x = a * std::cos(u2), y = b * std::sin(u3), z = b * std::cos(u3);
  Pose3 p;
  p.position = position;
  p.rotation = Mat3<double>{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
                             2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
                             2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
  return p;
}

}  // namespace

std::vector<TrialRecord> run_2d_scaling(const std::vector<int>& n_list, int targets_per_n, std::uint64_t seed,
                                        const BenchOptions& opts) {
  for (int n : n_list)
    if (n < 4) throw std::invalid_argument("run_2d_scaling: every n must be at least 4");
  if (targets_per_n < 0) throw std::invalid_argument("run_2d_scaling: target count must be nonnegative");
  const auto per = static_cast<std::size_t>(targets_per_n);
  return run_cells(n_list.size() * per, [&](std::size_t idx) {
    const CellContext c{"2d", n_list[idx / per], static_cast<int>(idx % per), seed, &opts};
    auto rng = trial_rng(seed, c.experiment, c.n, c.target);
    IKProblem problem;
    problem.chain = PlanarChain::uniform(c.n);
    // Uniform in the disk of radius 1 - 2/n, which keeps every target reachable.
    const double radius = (1.0 - 2.0 / c.n) * std::sqrt(uniform(rng, 0.0, 1.0));
    const double angle = uniform(rng, -M_PI, M_PI);
    problem.target = Pose2{radius * std::cos(angle), radius * std::sin(angle), uniform(rng, -M_PI, M_PI)};
    problem.cost = CostSpec::identity(problem.num_joints(), uniform_vector(rng, problem.num_joints(), -M_PI, M_PI));
    return run_cell(c, problem, rng);
  });
}

std::vector<TrialRecord> run_3d_scaling(const std::vector<int>& n_list, int targets_per_n, std::uint64_t seed,
                                        Mode3D mode, const BenchOptions& opts, Targets3D targets) {
  for (int n : n_list)
    if (n < 0 || n % 2 != 0) throw std::invalid_argument("run_3d_scaling: every n must be even and nonnegative");
  if (targets_per_n < 0) throw std::invalid_argument("run_3d_scaling: target count must be nonnegative");
  const std::string experiment = mode == Mode3D::feasibility ? "3d-feasibility" : "3d-optimality";
  const auto per = static_cast<std::size_t>(targets_per_n);
  return run_cells(n_list.size() * per, [&](std::size_t idx) {
    const CellContext c{experiment, n_list[idx / per], static_cast<int>(idx % per), seed, &opts};
    auto rng = trial_rng(seed, c.experiment, c.n, c.target);
    const KinematicChain chain = scaled_arm(c.n);
    IKProblem problem;
    problem.chain = chain;
    if (targets == Targets3D::fk) {
      const auto q_true = uniform_in_box(rng, chain.lower_limits(), chain.upper_limits());
      problem.target = chain.forward(std::span<const double>(q_true));
    } else {
      const Vec3<double> p{uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3)};
      problem.target = random_orientation_pose(rng, p);
    }
    if (mode == Mode3D::optimality) problem.cost = CostSpec::identity(chain.num_joints());
    return run_cell(c, problem, rng);
  });
}

// ------------------------------------------------------------------ stability toy

NLProgram stability_equality_program(const SupportPoints& support, const Point2<double>& query) {
  const std::size_t k = support.points.size();
  NLProgram prog(k);
  prog.x_lower.assign(k, 0.0);
  prog.x_upper.assign(k, 1.0);
  prog.initial_guess.assign(k, 1.0 / static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) prog.var_names.push_back("lambda" + std::to_string(i));
  auto pts = std::make_shared<std::vector<Point2<DiffScalar>>>(lift_points<DiffScalar>(support));
  const Point2<DiffScalar> p{DiffScalar(query[0]), DiffScalar(query[1])};
  prog.add_constraint({"convex_weights",
                       [pts, p](const EvalContext& ctx) {
                         const auto r = stability_equality_residuals<DiffScalar>(
                             p, std::span<const Point2<DiffScalar>>(*pts), std::span<const DiffScalar>(ctx.q));
                         return std::vector<DiffScalar>(r.begin(), r.end());
                       },
                       {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, true});
  return prog;
}

NLProgram stability_inequality_program(const SupportPoints& support, const Point2<double>& query) {
  NLProgram prog(2);
  prog.var_names = {"px", "py"};
  double cx = 0.0, cy = 0.0;
  for (const auto& s : support.points) {
    cx += s[0];
    cy += s[1];
  }
  const auto k = static_cast<double>(support.points.size());
  prog.initial_guess = {cx / k, cy / k};
  prog.add_constraint({"query", [](const EvalContext& ctx) { return std::vector<DiffScalar>(ctx.q); },
                       {query[0], query[1]}, {query[0], query[1]}, true});
  auto pts = std::make_shared<std::vector<Point2<DiffScalar>>>(lift_points<DiffScalar>(support));
  // The exact max over triangles: the smoothed margin's ln(N)/beta gap would misjudge points near the hull.
  prog.add_constraint({"margin",
                       [pts](const EvalContext& ctx) {
                         const Point2<DiffScalar> p{ctx.q[0], ctx.q[1]};
                         return std::vector<DiffScalar>{
                             stability_margin_hard<DiffScalar>(p, std::span<const Point2<DiffScalar>>(*pts))};
                       },
                       {0.0}, {kInf}, false});
  return prog;
}

bool stability_verdict_agrees(const TrialRecord& r) {
  if (r.branch == "boundary") return true;
  return r.success() == (r.branch == "inside");
}

std::vector<TrialRecord> run_stability_toy(std::uint64_t seed, int trials, const BenchOptions& opts) {
  if (trials < 1) throw std::invalid_argument("run_stability_toy: trials must be at least 1");
  constexpr int kSupport = 8;
  return run_cells(static_cast<std::size_t>(trials), [&](std::size_t idx) {
    const CellContext c{"stability", kSupport, static_cast<int>(idx), seed, &opts};
    auto rng = trial_rng(seed, c.experiment, c.n, c.target);
    SupportPoints support;
    for (int i = 0; i < kSupport; ++i) support.points.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    const Point2<double> query{uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2)};
    const auto hull = convex_hull(support.points);
    const double margin = hull_signed_distance(query, hull);
    const std::string verdict = std::abs(margin) < kStabilityBand ? "boundary" : margin > 0.0 ? "inside" : "outside";

    std::vector<TrialRecord> out;
    for (const std::string encoding : {"equality", "inequality"}) {
      const NLProgram prog = encoding == "equality" ? stability_equality_program(support, query)
                                                    : stability_inequality_program(support, query);
      TrialRecord r = base_record(c, encoding);
      r.branch = verdict;
      const auto t0 = Clock::now();
      const SolveResult res = solve(prog, prog.initial_guess, opts.solver);
      if (opts.record_time) r.wall_time_s = seconds_since(t0);
      r.iterations = res.inner_iterations_total;
      r.status = to_string(res.status);
      // Independent re-check of the encoding's defining conditions.
      const auto& x = res.x_star;
      double viol = 0.0;
      if (encoding == "equality") {
        double sum = -1.0, px = -query[0], py = -query[1];
        for (std::size_t i = 0; i < x.size(); ++i) {
          viol = std::max({viol, -x[i], x[i] - 1.0});
          sum += x[i];
          px += x[i] * support.points[i][0];
          py += x[i] * support.points[i][1];
        }
        viol = std::max({viol, std::abs(sum), std::abs(px), std::abs(py)});
      } else {
        const Point2<double> p{x[0], x[1]};
        viol = std::max({std::abs(x[0] - query[0]), std::abs(x[1] - query[1]),
                         -stability_margin_hard<double>(p, std::span<const Point2<double>>(support.points))});
      }
      r.max_violation = std::max(0.0, viol);
      if (res.status == SolveStatus::solved && !(r.max_violation <= kSuccessTol)) r.status = kRecheckFailed;
      out.push_back(r);
    }
    return out;
  });
}

// ------------------------------------------------------------------ gradient validation

namespace {

bool near_seam(double angle) { return M_PI - std::abs(ad::wrap_angle(angle)) < kGradientExclusion; }

/// True when every program row and joint is smooth in a kGradientExclusion neighborhood of x.
bool smooth_point(const IKProblem& problem, const NLProgram& prog, std::span<const double> x, bool new_form) {
  const auto ev = prog.evaluate(x, false);
  if (!ev.finite) return false;
  std::vector<DiffScalar> xs(x.begin(), x.end());
  EvalContext ctx{std::span<const DiffScalar>(xs), {}, {}, false};
  prog.map(ctx);
  for (const auto& p : ctx.probes)
    if (p.value() < kGradientExclusion) return false;
  if (new_form) {
    for (const auto& q : ctx.q)
      if (near_seam(q.value())) return false;
  } else {
    // Wrapped orientation residuals and the Euler extraction itself.
    const auto target = problem.target_params();
    const std::size_t pos_dim = problem.planar() ? 2 : 3;
    for (std::size_t i = pos_dim; i < target.size(); ++i) {
      if (near_seam(ev.rows[static_cast<Eigen::Index>(i)])) return false;
    }
    if (!problem.planar()) {
      const auto q = prog.joints(x);
      const Pose3 fk = std::get<KinematicChain>(problem.chain).forward(std::span<const double>(q));
      if (std::abs(fk.rotation(2, 0)) > 1.0 - kGradientExclusion) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<GradientFamilyResult> gradient_validation(int points, std::uint64_t seed, double h) {
  if (points < 1) throw std::invalid_argument("gradient_validation: need at least one point");
  std::vector<GradientFamilyResult> out;
  for (const bool spatial : {false, true}) {
    for (const bool new_form : {false, true}) {
      GradientFamilyResult fam;
      fam.family = std::string(new_form ? "new" : "old") + (spatial ? "-srs" : "-planar");
      auto rng = trial_rng(seed, "gradients-" + fam.family, 0, 0);
      for (int k = 0; k < points; ++k) {
        for (int attempt = 0; attempt < 10000; ++attempt) {
          IKProblem problem;
          std::vector<double> q;
          if (spatial) {
            const KinematicChain chain = scaled_arm(4);
            problem.chain = chain;
            q = uniform_in_box(rng, chain.lower_limits(), chain.upper_limits());
            const auto qt = uniform_in_box(rng, chain.lower_limits(), chain.upper_limits());
            problem.target = chain.forward(std::span<const double>(qt));
          } else {
            problem.chain = PlanarChain::uniform(8);
            q = uniform_vector(rng, 8, -M_PI, M_PI);
            problem.target = Pose2{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -M_PI, M_PI)};
          }
          problem.cost = CostSpec::identity(problem.num_joints(), uniform_vector(rng, problem.num_joints(), -1.0, 1.0));
          std::vector<double> x;
          std::unique_ptr<AnalyticIKMap> map;
          std::optional<NLProgram> prog;
          if (new_form) {
            map = make_ik_map(problem);
            MatchedGuess m;
            try {
              m = match_initial_guess(q, *map);
            } catch (const SingularConfiguration&) {
              continue;
            }
            prog = build_new(problem, *map, m.branch);
            x = new_program_point(m);
          } else {
            prog = build_old(problem);
            x = q;
          }
          if (!smooth_point(problem, *prog, x, new_form)) continue;
          fam.max_rel_error = std::max(fam.max_rel_error, check_gradients(*prog, x, h));
          ++fam.points;
          break;
        }
      }
      out.push_back(fam);
    }
  }
  return out;
}

// ------------------------------------------------------------------ summaries and output

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::tuple<std::string, int, std::string>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[{r.experiment, r.n_links, r.method}].push_back(&r);
  std::vector<MethodSummary> out;
  for (const auto& [key, rs] : groups) {
    MethodSummary s;
    std::tie(s.experiment, s.n_links, s.method) = key;
    s.trials = static_cast<int>(rs.size());
    std::vector<double> iters;
    double cost_sum = 0.0;
    for (const auto* r : rs) {
      iters.push_back(static_cast<double>(r->iterations));
      if (r->success()) {
        ++s.successes;
        cost_sum += r->cost;
      }
    }
    std::sort(iters.begin(), iters.end());
    const std::size_t m = iters.size();
    s.median_iterations = m == 0 ? 0.0 : (m % 2 == 1 ? iters[m / 2] : 0.5 * (iters[m / 2 - 1] + iters[m / 2]));
    s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
    s.mean_cost = s.successes > 0 ? cost_sum / s.successes : std::nan("");
    out.push_back(s);
  }
  return out;
}

namespace {
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::nan("");
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("CSV: bad number '" + s + "'");
  return v;
}

double json_double(const nlohmann::json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

nlohmann::json json_double_out(double v) {
  if (std::isfinite(v)) return v;
  return fmt_double(v);
}
}  // namespace

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.n_links << ',' << r.target_id << ',' << r.method << ',' << r.branch << ','
        << r.seed << ',' << r.status << ',' << fmt_double(r.cost) << ',' << r.iterations << ','
        << fmt_double(r.max_violation) << ',' << fmt_double(r.wall_time_s) << '\n';
  }
}

nlohmann::json records_to_json(const std::vector<TrialRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"experiment", r.experiment},
                   {"n_links", r.n_links},
                   {"target_id", r.target_id},
                   {"method", r.method},
                   {"branch", r.branch},
                   {"seed", r.seed},
                   {"status", r.status},
                   {"cost", json_double_out(r.cost)},
                   {"iterations", r.iterations},
                   {"max_violation", json_double_out(r.max_violation)},
                   {"wall_time_s", json_double_out(r.wall_time_s)}});
  }
  return arr;
}

std::vector<TrialRecord> records_from_json(const nlohmann::json& j) {
  std::vector<TrialRecord> out;
  for (const auto& e : j) {
    TrialRecord r;
    r.experiment = e.at("experiment").get<std::string>();
    r.n_links = e.at("n_links").get<int>();
    r.target_id = e.at("target_id").get<int>();
    r.method = e.at("method").get<std::string>();
    r.branch = e.at("branch").get<std::string>();
    r.seed = e.at("seed").get<std::uint64_t>();
    r.status = e.at("status").get<std::string>();
    r.cost = json_double(e.at("cost"));
    r.iterations = e.at("iterations").get<long>();
    r.max_violation = json_double(e.at("max_violation"));
    r.wall_time_s = json_double(e.at("wall_time_s"));
    out.push_back(r);
  }
  return out;
}

void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path) {
  auto write = [&](std::ostream& os) {
    if (format == OutputFormat::csv) {
      write_csv(os, records);
    } else {
      os << records_to_json(records).dump(2) << '\n';
    }
  };
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

std::vector<TrialRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("CSV: missing or unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw std::invalid_argument("CSV: expected 11 fields in '" + line + "'");
    TrialRecord r;
    r.experiment = f[0];
    r.n_links = std::stoi(f[1]);
    r.target_id = std::stoi(f[2]);
    r.method = f[3];
    r.branch = f[4];
    r.seed = std::stoull(f[5]);
    r.status = f[6];
    r.cost = parse_double(f[7]);
    r.iterations = std::stol(f[8]);
    r.max_violation = parse_double(f[9]);
    r.wall_time_s = parse_double(f[10]);
    out.push_back(r);
  }
  return out;
}

}  // namespace ikform
