#include "ikform/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace ikform {

std::size_t SamplePlan::grid_size() const {
  std::size_t g = 1;
  for (std::size_t r : resolution) g *= r;
  return g;
}

std::size_t SamplePlan::budget() const { return grid_size() * branches.size(); }

SamplePlan SamplePlan::uniform(const AnalyticIKMap& map, std::size_t per_param, std::vector<Branch> branches) {
  if (per_param == 0) throw std::invalid_argument("SamplePlan: resolution must be positive");
  if (branches.empty()) branches = map.branches();
  for (const auto& b : branches) {
    if (b.size() != map.branch_size()) throw std::invalid_argument("SamplePlan: branch has the wrong size");
  }
  return {std::vector<std::size_t>(map.free_dim(), per_param), std::move(branches)};
}

SamplePlan SamplePlan::from_budget(const AnalyticIKMap& map, std::size_t max_samples, std::vector<Branch> branches) {
  if (branches.empty()) branches = map.branches();
  const std::size_t k = map.free_dim();
  const std::size_t per_branch = std::max<std::size_t>(1, max_samples / branches.size());
  std::size_t r = 1;
  if (k > 0) {
    auto fits = [&](std::size_t cand) {
      std::size_t total = 1;
      for (std::size_t i = 0; i < k; ++i) {
        if (total > per_branch / cand) return false;
        total *= cand;
      }
      return total <= per_branch;
    };
    while (fits(r + 1)) ++r;
  }
  return uniform(map, r, std::move(branches));
}

namespace {

/// Lattice origin per free parameter: -pi for joints, 0 for the SRS arm angle.
std::vector<double> lattice_origin(const AnalyticIKMap& map) {
  std::vector<double> origin(map.free_dim(), -M_PI);
  if (dynamic_cast<const SrsChainIKMap*>(&map) != nullptr) origin.back() = 0.0;
  return origin;
}

std::vector<double> point_of(const SamplePlan& plan, std::span<const double> origin, std::size_t grid_index) {
  std::vector<double> free(plan.resolution.size());
  for (std::size_t k = plan.resolution.size(); k-- > 0;) {
    const std::size_t r = plan.resolution[k];
    const std::size_t j = grid_index % r;
    grid_index /= r;
    free[k] = origin[k] + 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(r);
  }
  return free;
}

/// Pose the sampler inverts: the target, with a box target replaced by its center.
std::vector<double> sampled_pose(const IKProblem& problem) {
  auto pose = problem.target_params();
  if (problem.mode == TargetMode::box) {
    for (std::size_t i = 0; i < problem.p_lb.size(); ++i) pose[i] = 0.5 * (problem.p_lb[i] + problem.p_ub[i]);
  }
  return pose;
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();

  bool better_than(const Candidate& o) const { return cost < o.cost || (cost == o.cost && index < o.index); }
};

/// Shared per-sample work; returns whether the sample is feasible and fills its cost.
struct SampleEvaluator {
  const IKProblem& problem;
  const SamplePlan& plan;
  std::unique_ptr<AnalyticIKMap> map;
  std::vector<double> origin;
  std::vector<double> pose;
  std::size_t grid;

  SampleEvaluator(const IKProblem& p, const SamplePlan& pl)
      : problem(p), plan(pl), map(make_ik_map(p)), origin(lattice_origin(*map)), pose(sampled_pose(p)),
        grid(pl.grid_size()) {
    if (plan.resolution.size() != map->free_dim()) {
      throw std::invalid_argument("sample_ik: plan resolution does not match the free-parameter count");
    }
  }

  enum class Outcome { unreachable, rejected, feasible };

  Outcome evaluate(std::size_t index, double& cost, IKResult* keep = nullptr) const {
    const Branch& branch = plan.branches[index / grid];
    const auto free = point_of(plan, origin, index % grid);
    IKResult ik;
    try {
      ik = map->evaluate(pose, free, branch);
    } catch (const SingularConfiguration&) {
      return Outcome::unreachable;
    }
    for (double d : ik.probes)
      if (!(d >= 0.0)) return Outcome::unreachable;
    if (!(check_joints(problem, ik.q).max() <= 1e-8)) return Outcome::rejected;
    cost = problem.cost ? joint_centering_cost(std::span<const double>(ik.q), problem.cost->weight,
                                               std::span<const double>(problem.cost->q_nom))
                        : 0.0;
    if (keep) *keep = std::move(ik);
    return Outcome::feasible;
  }

  SampleReport finish(const Candidate& best, std::size_t reachable, std::size_t feasible) const {
    SampleReport rep;
    rep.evaluated = plan.budget();
    rep.reachable = reachable;
    rep.feasible = feasible;
    if (feasible > 0) {
      SampleSolution sol;
      double cost = 0.0;
      IKResult ik;
      evaluate(best.index, cost, &ik);
      sol.q = std::move(ik.q);
      sol.free = point_of(plan, origin, best.index % grid);
      sol.branch = plan.branches[best.index / grid];
      sol.cost = cost;
      sol.index = best.index;
      rep.best = std::move(sol);
    }
    return rep;
  }
};

}  // namespace

std::vector<double> lattice_point(const SamplePlan& plan, const AnalyticIKMap& map, std::size_t grid_index) {
  if (plan.resolution.size() != map.free_dim()) throw std::invalid_argument("lattice_point: plan/map mismatch");
  if (grid_index >= plan.grid_size()) throw std::out_of_range("lattice_point: index outside the lattice");
  return point_of(plan, lattice_origin(map), grid_index);
}

SampleReport sample_ik_serial(const IKProblem& problem, const SamplePlan& plan) {
  const SampleEvaluator ev(problem, plan);
  Candidate best;
  std::size_t reachable = 0, feasible = 0;
  for (std::size_t i = 0; i < plan.budget(); ++i) {
    double cost = 0.0;
    const auto outcome = ev.evaluate(i, cost);
    if (outcome == SampleEvaluator::Outcome::unreachable) continue;
    ++reachable;
    if (outcome != SampleEvaluator::Outcome::feasible) continue;
    ++feasible;
    const Candidate c{cost, i};
    if (c.better_than(best)) best = c;
  }
  return ev.finish(best, reachable, feasible);
}

SampleReport sample_ik(const IKProblem& problem, const SamplePlan& plan) {
  const SampleEvaluator ev(problem, plan);
  const auto total = static_cast<std::ptrdiff_t>(plan.budget());
  Candidate best;
  std::size_t reachable = 0, feasible = 0;
#pragma omp parallel num_threads(worker_threads())
  {
    Candidate local;
    std::size_t local_reach = 0, local_feas = 0;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < total; ++i) {
      double cost = 0.0;
      const auto outcome = ev.evaluate(static_cast<std::size_t>(i), cost);
      if (outcome == SampleEvaluator::Outcome::unreachable) continue;
      ++local_reach;
      if (outcome != SampleEvaluator::Outcome::feasible) continue;
      ++local_feas;
      const Candidate c{cost, static_cast<std::size_t>(i)};
      if (c.better_than(local)) local = c;
    }
#pragma omp critical(ikform_sample_reduce)
    {
      reachable += local_reach;
      feasible += local_feas;
      if (local.better_than(best)) best = local;
    }
  }
  return ev.finish(best, reachable, feasible);
}

int worker_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("IKFORM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<int>(n, static_cast<int>(cap));
  }
  return std::max(1, n);
}

}  // namespace ikform
