#pragma once

/**
 * @file formulation.hpp
 * @brief Nonlinear programs for IK in joint space ("old") and in
 *        (pose, self-motion) space through an analytic IK map ("new").
 */

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ikform/analytic_ik.hpp"
#include "ikform/autodiff.hpp"
#include "ikform/constraints.hpp"
#include "ikform/kinematics.hpp"

namespace ikform {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Reachability rows require every probe to stay at least this far inside the IK domain.
inline constexpr double kProbeMargin = 1e-9;

/// Per-evaluation scratch: the decision vector and the joint vector it implies.
struct EvalContext {
  std::span<const DiffScalar> x;
  std::vector<DiffScalar> q;
  std::vector<DiffScalar> probes;
  bool clipped = false;
};

using MapFn = std::function<void(EvalContext&)>;
using CostFn = std::function<DiffScalar(const EvalContext&)>;
using RowsFn = std::function<std::vector<DiffScalar>(const EvalContext&)>;

/// lower <= rows(ctx) <= upper, elementwise. Equal bounds mark equality rows.
struct ConstraintBlock {
  std::string name;
  RowsFn rows;
  std::vector<double> lower;
  std::vector<double> upper;
  bool linear = false;

  std::size_t size() const { return lower.size(); }
};

/// Values (and optionally derivatives) of a program at one point.
struct ProgramEval {
  double cost = 0.0;
  Eigen::VectorXd cost_grad;
  Eigen::VectorXd rows;
  Eigen::MatrixXd jacobian;  ///< rows x vars; empty when derivatives were not requested
  bool finite = true;
};

class NLProgram {
 public:
  explicit NLProgram(std::size_t num_vars);

  std::size_t num_vars() const { return num_vars_; }

  std::vector<double> x_lower;
  std::vector<double> x_upper;
  std::vector<double> initial_guess;
  std::vector<std::string> var_names;
  /// Fills ctx.q (and probes) from ctx.x. Defaults to q = x.
  MapFn map;
  /// Constant zero until set_cost is called.
  CostFn cost;
  bool has_cost = false;
  std::vector<ConstraintBlock> constraints;

  void add_constraint(ConstraintBlock block) { constraints.push_back(std::move(block)); }
  void set_cost(CostFn fn) {
    cost = std::move(fn);
    has_cost = true;
  }

  std::size_t num_rows() const;
  std::vector<double> row_lower() const;
  std::vector<double> row_upper() const;
  std::vector<bool> row_linear() const;

  ProgramEval evaluate(std::span<const double> x, bool derivatives = true) const;
  /// Joint vector implied by x (plain values).
  std::vector<double> joints(std::span<const double> x) const;

  /// Largest violation over all rows and variable bounds.
  double max_violation(std::span<const double> x) const;
  double max_violation(const ProgramEval& ev, std::span<const double> x) const;
  /// Same, restricted to one constraint block.
  double block_violation(std::span<const double> x, const std::string& name) const;

 private:
  std::size_t num_vars_;
};

enum class TargetMode { full, position_only, box };

TargetMode target_mode_from_string(const std::string& s);
std::string to_string(TargetMode m);

/// (q - q_nom)^T M (q - q_nom)
struct CostSpec {
  Eigen::MatrixXd weight;
  std::vector<double> q_nom;

  static CostSpec identity(std::size_t n, std::vector<double> q_nom = {});
};

/// Callback on the joint vector; inequalities are g(q) <= 0, equalities h(q) = 0.
using JointRowsFn = std::function<std::vector<DiffScalar>(std::span<const DiffScalar>)>;

struct JointConstraint {
  std::string name;
  JointRowsFn fn;
  std::size_t rows = 1;
};

struct IKProblem {
  std::variant<PlanarChain, KinematicChain> chain;
  /// Desired end-effector pose: Pose2 for planar chains, Pose3 for spatial ones.
  std::variant<Pose2, Pose3> target;
  TargetMode mode = TargetMode::full;
  /// Position bounds for TargetMode::box (2 entries planar, 3 spatial).
  std::vector<double> p_lb;
  std::vector<double> p_ub;
  std::optional<CostSpec> cost;
  std::optional<Scene> scene;
  std::vector<JointConstraint> inequalities;
  std::vector<JointConstraint> equalities;

  bool planar() const { return std::holds_alternative<PlanarChain>(chain); }
  std::size_t num_joints() const;
  std::vector<double> joint_lower() const;
  std::vector<double> joint_upper() const;
  /// Target as pose parameters: (x, y, theta) or (x, y, z, roll, pitch, yaw).
  std::vector<double> target_params() const;
  /// Checks mode/chain/target consistency; throws std::invalid_argument.
  void validate() const;
};

/// Analytic IK map for the problem's chain.
std::unique_ptr<AnalyticIKMap> make_ik_map(const IKProblem& problem);

/// Joint-space program: variables q, nonlinear pose rows.
NLProgram build_old(const IKProblem& problem);

/**
 * Program over (pose parameters, self-motion parameters) with joints given by
 * the analytic IK map at a fixed branch. Pose-target rows are linear; joint
 * limits, collision and user rows are composed with the map; every probe gets
 * a row D_k >= kProbeMargin. The returned program keeps a reference to `map`.
 */
NLProgram build_new(const IKProblem& problem, const AnalyticIKMap& map, const Branch& branch);

/// (pose, free, branch) whose IK reproduces q0; throws SingularConfiguration if q0 is not invertible.
MatchedGuess match_initial_guess(std::span<const double> q0, const AnalyticIKMap& map);

/// Decision vector [pose, free] of the new program for a matched guess.
std::vector<double> new_program_point(const MatchedGuess& m);

/// Shifts angular pose parameters of `x` by multiples of 2 pi toward `target`; IK(x) is unchanged.
void unwrap_toward(std::vector<double>& x, std::span<const double> target, const AnalyticIKMap& map);

/// Residual checks applied to a joint vector independently of any program.
struct JointCheck {
  double pose_error = 0.0;   ///< max-abs of the pose residual rows (mode-dependent)
  double limit_error = 0.0;  ///< max joint-limit violation
  double collision_error = 0.0;
  double user_error = 0.0;
  double max() const;
};

/// Independent re-check of a joint vector against the problem (not via any NLProgram).
JointCheck check_joints(const IKProblem& problem, std::span<const double> q);

IKProblem problem_from_json(const nlohmann::json& j, const std::string& base_dir = ".");

}  // namespace ikform
