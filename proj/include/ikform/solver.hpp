#pragma once

/**
 * @file solver.hpp
 * @brief Augmented-Lagrangian solver for NLProgram with box-projected
 *        quasi-Newton inner iterations.
 */

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ikform/formulation.hpp"

namespace ikform {

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-6;
  int max_outer = 50;
  int max_inner = 200;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  /// The penalty grows when the max violation shrinks by less than this factor.
  double required_progress = 4.0;
  double max_penalty = 1e10;
  /// Wall-clock limit in seconds; 0 disables it.
  double timeout_s = 0.0;

  /// Throws std::invalid_argument unless every field is positive (timeout may be 0).
  void validate() const;
};

void from_json(const nlohmann::json& j, SolverOptions& o);
void to_json(nlohmann::json& j, const SolverOptions& o);

enum class SolveStatus { solved, infeasible_stalled, timeout, evaluation_failure };

std::string to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible_stalled;
  std::vector<double> x_star;
  double cost = 0.0;
  double max_constraint_violation = 0.0;
  /// Projected-gradient norm of the augmented Lagrangian at x_star.
  double stationarity = 0.0;
  /// Feasible and stationarity <= optimality_tol (always true for feasibility programs once solved).
  bool optimal = false;
  int outer_iterations = 0;
  int inner_iterations_total = 0;
  double wall_time = 0.0;
  /// Max violation at the end of each outer iteration.
  std::vector<double> violation_history;
};

/**
 * Minimizes program.cost subject to its rows and variable box from x0.
 * x0 is projected into the box first. A program without a cost stops as soon
 * as it is feasible. If the last iterate is infeasible (stall, timeout or
 * iteration limit) the best feasible outer iterate is returned when one exists.
 */
SolveResult solve(const NLProgram& program, std::span<const double> x0, const SolverOptions& opts = {});

/// Max relative error |ad - fd| / max(1, |fd|) over all cost and row partials (central differences, step h).
double check_gradients(const NLProgram& program, std::span<const double> x, double h = 1e-6);

}  // namespace ikform
