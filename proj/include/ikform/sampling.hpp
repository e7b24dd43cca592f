#pragma once

/**
 * @file sampling.hpp
 * @brief Grid-sampling baseline: evaluate the analytic IK map on a uniform
 *        lattice of self-motion parameters for every branch and keep the
 *        cheapest configuration that passes every constraint.
 */

#include <cstddef>
#include <optional>
#include <vector>

#include "ikform/formulation.hpp"

namespace ikform {

/**
 * Uniform lattice over the free parameters times a branch set. Parameter k
 * takes resolution[k] values offset + 2 pi j / resolution[k], j = 0..res-1,
 * with offset -pi for joint-like parameters and 0 for the SRS arm angle, so
 * doubling a resolution yields a superset of points.
 */
struct SamplePlan {
  std::vector<std::size_t> resolution;
  std::vector<Branch> branches;

  /// Product of resolutions times the number of branches.
  std::size_t budget() const;
  std::size_t grid_size() const;

  /// Same resolution for every free parameter; an empty branch list means all branches.
  static SamplePlan uniform(const AnalyticIKMap& map, std::size_t per_param, std::vector<Branch> branches = {});
  /// Largest equal resolution whose budget does not exceed `max_samples` (at least 1 per parameter).
  static SamplePlan from_budget(const AnalyticIKMap& map, std::size_t max_samples,
                                std::vector<Branch> branches = {});
};

struct SampleSolution {
  std::vector<double> q;
  std::vector<double> free;
  Branch branch;
  double cost = 0.0;
  std::size_t index = 0;  ///< position in the (branch, lattice) enumeration
};

struct SampleReport {
  std::optional<SampleSolution> best;
  std::size_t evaluated = 0;
  std::size_t reachable = 0;  ///< samples with every probe >= 0
  std::size_t feasible = 0;
};

/// Free-parameter values of lattice point `grid_index` (mixed radix, first parameter slowest).
std::vector<double> lattice_point(const SamplePlan& plan, const AnalyticIKMap& map, std::size_t grid_index);

/// OpenMP-parallel sampler; ties in cost are broken by the lowest enumeration index.
SampleReport sample_ik(const IKProblem& problem, const SamplePlan& plan);
/// Single-threaded reference with identical results.
SampleReport sample_ik_serial(const IKProblem& problem, const SamplePlan& plan);

/// Worker count: OpenMP's maximum, capped by the IKFORM_THREADS environment variable.
int worker_threads();

}  // namespace ikform
