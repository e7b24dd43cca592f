#include "ikform/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ikform {

// ------------------------------------------------------------------ NLProgram

NLProgram::NLProgram(std::size_t num_vars)
    : x_lower(num_vars, -kInf), x_upper(num_vars, kInf), initial_guess(num_vars, 0.0), num_vars_(num_vars) {
  map = [](EvalContext& ctx) { ctx.q.assign(ctx.x.begin(), ctx.x.end()); };
  cost = [](const EvalContext&) { return DiffScalar(0.0); };
}

std::size_t NLProgram::num_rows() const {
  std::size_t m = 0;
  for (const auto& b : constraints) m += b.size();
  return m;
}

std::vector<double> NLProgram::row_lower() const {
  std::vector<double> out;
  for (const auto& b : constraints) out.insert(out.end(), b.lower.begin(), b.lower.end());
  return out;
}

std::vector<double> NLProgram::row_upper() const {
  std::vector<double> out;
  for (const auto& b : constraints) out.insert(out.end(), b.upper.begin(), b.upper.end());
  return out;
}

std::vector<bool> NLProgram::row_linear() const {
  std::vector<bool> out;
  for (const auto& b : constraints) out.insert(out.end(), b.size(), b.linear);
  return out;
}

ProgramEval NLProgram::evaluate(std::span<const double> x, bool derivatives) const {
  if (x.size() != num_vars_) throw std::invalid_argument("NLProgram::evaluate: wrong number of variables");
  const auto n = static_cast<Eigen::Index>(num_vars_);
  std::vector<DiffScalar> xs;
  xs.reserve(num_vars_);
  for (std::size_t i = 0; i < num_vars_; ++i) {
    xs.push_back(derivatives ? DiffScalar::variable(x[i], i, num_vars_) : DiffScalar(x[i]));
  }
  ProgramEval ev;
  const auto m = static_cast<Eigen::Index>(num_rows());
  ev.rows = Eigen::VectorXd::Constant(m, std::nan(""));
  ev.cost_grad = Eigen::VectorXd::Zero(n);
  if (derivatives) ev.jacobian = Eigen::MatrixXd::Zero(m, n);

  EvalContext ctx{std::span<const DiffScalar>(xs), {}, {}, false};
  try {
    map(ctx);
  } catch (const SingularConfiguration&) {
    ev.finite = false;
    ev.cost = std::nan("");
    return ev;
  }
  auto read = [&](const DiffScalar& v, double& value, auto&& grad) {
    value = v.value();
    if (derivatives) {
      for (std::size_t k = 0; k < v.size(); ++k) grad(static_cast<Eigen::Index>(k), v.d(k));
    }
  };
  if (has_cost && cost) {
    read(cost(ctx), ev.cost, [&](Eigen::Index k, double g) { ev.cost_grad[k] = g; });
  }
  Eigen::Index r = 0;
  for (const auto& block : constraints) {
    const auto rows = block.rows(ctx);
    if (rows.size() != block.size()) {
      throw std::logic_error("NLProgram: block '" + block.name + "' returned the wrong number of rows");
    }
    for (const auto& v : rows) {
      read(v, ev.rows[r], [&](Eigen::Index k, double g) { ev.jacobian(r, k) = g; });
      ++r;
    }
  }
  ev.finite = std::isfinite(ev.cost) && ev.rows.allFinite() && ev.cost_grad.allFinite() &&
              (!derivatives || ev.jacobian.allFinite());
  return ev;
}

std::vector<double> NLProgram::joints(std::span<const double> x) const {
  std::vector<DiffScalar> xs(x.begin(), x.end());
  EvalContext ctx{std::span<const DiffScalar>(xs), {}, {}, false};
  map(ctx);
  std::vector<double> q;
  q.reserve(ctx.q.size());
  for (const auto& v : ctx.q) q.push_back(v.value());
  return q;
}

namespace {
double row_violation(double v, double lo, double hi) {
  if (!std::isfinite(v)) return kInf;
  return std::max({0.0, lo - v, v - hi});
}
}  // namespace

double NLProgram::max_violation(const ProgramEval& ev, std::span<const double> x) const {
  if (!ev.finite) return kInf;
  double worst = 0.0;
  const auto lo = row_lower();
  const auto hi = row_upper();
  for (Eigen::Index i = 0; i < ev.rows.size(); ++i) {
    worst = std::max(worst, row_violation(ev.rows[i], lo[i], hi[i]));
  }
  for (std::size_t i = 0; i < num_vars_; ++i) worst = std::max(worst, row_violation(x[i], x_lower[i], x_upper[i]));
  return worst;
}

double NLProgram::max_violation(std::span<const double> x) const {
  return max_violation(evaluate(x, false), x);
}

double NLProgram::block_violation(std::span<const double> x, const std::string& name) const {
  const auto ev = evaluate(x, false);
  Eigen::Index r = 0;
  for (const auto& block : constraints) {
    if (block.name == name) {
      if (!ev.finite) return kInf;
      double worst = 0.0;
      for (std::size_t i = 0; i < block.size(); ++i) {
        worst = std::max(worst, row_violation(ev.rows[r + static_cast<Eigen::Index>(i)], block.lower[i],
                                              block.upper[i]));
      }
      return worst;
    }
    r += static_cast<Eigen::Index>(block.size());
  }
  throw std::invalid_argument("NLProgram: no constraint block named '" + name + "'");
}

// ------------------------------------------------------------------ problem

TargetMode target_mode_from_string(const std::string& s) {
  if (s == "full") return TargetMode::full;
  if (s == "position_only" || s == "position-only") return TargetMode::position_only;
  if (s == "box") return TargetMode::box;
  throw std::invalid_argument("unknown target mode '" + s + "' (expected full, position_only or box)");
}

std::string to_string(TargetMode m) {
  switch (m) {
    case TargetMode::full:
      return "full";
    case TargetMode::position_only:
      return "position_only";
    case TargetMode::box:
      return "box";
  }
  return "full";
}

CostSpec CostSpec::identity(std::size_t n, std::vector<double> q_nom) {
  if (q_nom.empty()) q_nom.assign(n, 0.0);
  return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
          std::move(q_nom)};
}

std::size_t IKProblem::num_joints() const {
  return std::visit([](const auto& c) { return c.num_joints(); }, chain);
}

std::vector<double> IKProblem::joint_lower() const {
  if (const auto* p = std::get_if<PlanarChain>(&chain)) {
    return p->q_lb.empty() ? std::vector<double>(p->num_joints(), -2.0 * M_PI) : p->q_lb;
  }
  return std::get<KinematicChain>(chain).lower_limits();
}

std::vector<double> IKProblem::joint_upper() const {
  if (const auto* p = std::get_if<PlanarChain>(&chain)) {
    return p->q_ub.empty() ? std::vector<double>(p->num_joints(), 2.0 * M_PI) : p->q_ub;
  }
  return std::get<KinematicChain>(chain).upper_limits();
}

std::vector<double> IKProblem::target_params() const {
  if (const auto* p2 = std::get_if<Pose2>(&target)) return {p2->x, p2->y, p2->theta};
  const auto p = pose_params(std::get<Pose3>(target));
  return {p.begin(), p.end()};
}

void IKProblem::validate() const {
  if (planar() != std::holds_alternative<Pose2>(target)) {
    throw std::invalid_argument("IKProblem: planar chains need a Pose2 target, spatial chains a Pose3 target");
  }
  const std::size_t dim = planar() ? 2 : 3;
  if (mode == TargetMode::box) {
    if (p_lb.size() != dim || p_ub.size() != dim) {
      throw std::invalid_argument("IKProblem: box mode needs p_lb and p_ub with " + std::to_string(dim) +
                                  " entries");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(p_lb[i] <= p_ub[i])) throw std::invalid_argument("IKProblem: p_lb must not exceed p_ub");
    }
  }
  const auto n = num_joints();
  if (cost) {
    if (cost->weight.rows() != static_cast<Eigen::Index>(n) || cost->weight.cols() != static_cast<Eigen::Index>(n) ||
        cost->q_nom.size() != n) {
      throw std::invalid_argument("IKProblem: cost weight/q_nom dimensions do not match the chain");
    }
  }
}

std::unique_ptr<AnalyticIKMap> make_ik_map(const IKProblem& problem) {
  return std::visit([](const auto& c) { return ikform::make_ik_map(c); }, problem.chain);
}

// ------------------------------------------------------------------ shared rows

namespace {

std::shared_ptr<KinematicChain> spatial_chain(const IKProblem& p) {
  if (const auto* pc = std::get_if<PlanarChain>(&p.chain)) {
    auto c = *pc;
    if (c.q_lb.empty()) {
      c.q_lb = p.joint_lower();
      c.q_ub = p.joint_upper();
    }
    return std::make_shared<KinematicChain>(to_spatial(c));
  }
  return std::make_shared<KinematicChain>(std::get<KinematicChain>(p.chain));
}

/// Collision, user constraints and cost, all expressed on ctx.q.
void add_joint_space_terms(NLProgram& prog, const IKProblem& problem) {
  const std::size_t n = problem.num_joints();
  if (problem.scene && !problem.scene->empty()) {
    auto chain = spatial_chain(problem);
    auto scene = std::make_shared<Scene>(*problem.scene);
    std::vector<double> zeros(n, 0.0);
    const auto count = min_distance_residuals<double>(*chain, std::span<const double>(zeros), *scene).size();
    if (count > 0) {
      prog.add_constraint({"collision",
                           [chain, scene](const EvalContext& ctx) {
                             return min_distance_residuals<DiffScalar>(*chain, std::span<const DiffScalar>(ctx.q),
                                                                       *scene);
                           },
                           std::vector<double>(count, 0.0), std::vector<double>(count, kInf), false});
    }
  }
  for (const auto& g : problem.inequalities) {
    auto fn = g.fn;
    prog.add_constraint({"g:" + g.name,
                         [fn](const EvalContext& ctx) { return fn(std::span<const DiffScalar>(ctx.q)); },
                         std::vector<double>(g.rows, -kInf), std::vector<double>(g.rows, 0.0), false});
  }
  for (const auto& h : problem.equalities) {
    auto fn = h.fn;
    prog.add_constraint({"h:" + h.name,
                         [fn](const EvalContext& ctx) { return fn(std::span<const DiffScalar>(ctx.q)); },
                         std::vector<double>(h.rows, 0.0), std::vector<double>(h.rows, 0.0), false});
  }
  if (problem.cost) {
    auto spec = std::make_shared<CostSpec>(*problem.cost);
    prog.set_cost([spec](const EvalContext& ctx) {
      return joint_centering_cost(std::span<const DiffScalar>(ctx.q), spec->weight,
                                  std::span<const double>(spec->q_nom));
    });
  }
}

/// Pose parameters of FK(q) as DiffScalars.
std::vector<DiffScalar> fk_params(const IKProblem& problem, std::span<const DiffScalar> q) {
  if (const auto* pc = std::get_if<PlanarChain>(&problem.chain)) {
    const auto p = planar_fk(*pc, q);
    return {p.x, p.y, p.theta};
  }
  const auto p = pose_params(std::get<KinematicChain>(problem.chain).forward(q));
  return {p.begin(), p.end()};
}

}  // namespace

// ------------------------------------------------------------------ builders

NLProgram build_old(const IKProblem& problem) {
  problem.validate();
  const std::size_t n = problem.num_joints();
  NLProgram prog(n);
  prog.x_lower = problem.joint_lower();
  prog.x_upper = problem.joint_upper();
  for (std::size_t i = 0; i < n; ++i) prog.var_names.push_back("q" + std::to_string(i));

  const auto target = problem.target_params();
  const std::size_t pos_dim = problem.planar() ? 2 : 3;
  const std::size_t pose_dim = target.size();
  auto prob = std::make_shared<IKProblem>(problem);

  switch (problem.mode) {
    case TargetMode::full:
      prog.add_constraint({"pose",
                           [prob, target, pos_dim, pose_dim](const EvalContext& ctx) {
                             auto p = fk_params(*prob, ctx.q);
                             for (std::size_t i = 0; i < pose_dim; ++i) {
                               p[i] -= target[i];
                               if (i >= pos_dim) p[i] = ad::wrap_angle(p[i]);
                             }
                             return p;
                           },
                           std::vector<double>(pose_dim, 0.0), std::vector<double>(pose_dim, 0.0), false});
      break;
    case TargetMode::position_only:
      prog.add_constraint({"pose",
                           [prob, target, pos_dim](const EvalContext& ctx) {
                             auto p = fk_params(*prob, ctx.q);
                             p.resize(pos_dim);
                             for (std::size_t i = 0; i < pos_dim; ++i) p[i] -= target[i];
                             return p;
                           },
                           std::vector<double>(pos_dim, 0.0), std::vector<double>(pos_dim, 0.0), false});
      break;
    case TargetMode::box:
      prog.add_constraint({"pose",
                           [prob, pos_dim](const EvalContext& ctx) {
                             auto p = fk_params(*prob, ctx.q);
                             p.resize(pos_dim);
                             return p;
                           },
                           problem.p_lb, problem.p_ub, false});
      break;
  }
  add_joint_space_terms(prog, problem);
  return prog;
}

NLProgram build_new(const IKProblem& problem, const AnalyticIKMap& map, const Branch& branch) {
  problem.validate();
  if (map.num_joints() != problem.num_joints()) {
    throw std::invalid_argument("build_new: IK map and problem disagree on the joint count");
  }
  if (branch.size() != map.branch_size()) throw std::invalid_argument("build_new: branch has the wrong size");
  const std::size_t pd = map.pose_dim();
  const std::size_t fd = map.free_dim();
  NLProgram prog(pd + fd);

  const auto lo = problem.joint_lower();
  const auto hi = problem.joint_upper();
  // Planar free joints keep their limits as variable bounds. SRS prefix parameters are periodic
  // (the map wraps them), so their limits are enforced on the mapped joints like the tail's.
  const bool planar = problem.planar();
  const std::size_t free_joints = planar ? fd : fd - 1;
  const std::size_t boxed = planar ? fd : 0;
  for (std::size_t i = 0; i < boxed; ++i) {
    prog.x_lower[pd + i] = lo[i];
    prog.x_upper[pd + i] = hi[i];
  }
  const char* pose_names[2][6] = {{"x", "y", "theta", "", "", ""}, {"x", "y", "z", "roll", "pitch", "yaw"}};
  for (std::size_t i = 0; i < pd; ++i) prog.var_names.emplace_back(pose_names[planar ? 0 : 1][i]);
  for (std::size_t i = 0; i < free_joints; ++i) prog.var_names.push_back("q" + std::to_string(i));
  if (!planar) prog.var_names.emplace_back("psi");

  prog.map = [&map, branch, pd](EvalContext& ctx) {
    auto ik = map.evaluate(ctx.x.first(pd), ctx.x.subspan(pd), branch);
    ctx.q = std::move(ik.q);
    ctx.probes = std::move(ik.probes);
    ctx.clipped = ik.clipped;
  };

  const auto target = problem.target_params();
  const std::size_t pos_dim = planar ? 2 : 3;
  switch (problem.mode) {
    case TargetMode::full:
      prog.add_constraint({"pose",
                           [pd](const EvalContext& ctx) {
                             return std::vector<DiffScalar>(ctx.x.begin(), ctx.x.begin() + static_cast<long>(pd));
                           },
                           target, target, true});
      break;
    case TargetMode::position_only:
    case TargetMode::box: {
      std::vector<double> plo(target.begin(), target.begin() + static_cast<long>(pos_dim));
      std::vector<double> phi = plo;
      if (problem.mode == TargetMode::box) {
        plo = problem.p_lb;
        phi = problem.p_ub;
      }
      prog.add_constraint({"pose",
                           [pos_dim](const EvalContext& ctx) {
                             return std::vector<DiffScalar>(ctx.x.begin(),
                                                            ctx.x.begin() + static_cast<long>(pos_dim));
                           },
                           plo, phi, true});
      break;
    }
  }

  // Limits on every joint that is not a bounded variable.
  prog.add_constraint({"joint_limits",
                       [boxed](const EvalContext& ctx) {
                         return std::vector<DiffScalar>(ctx.q.begin() + static_cast<long>(boxed), ctx.q.end());
                       },
                       std::vector<double>(lo.begin() + static_cast<long>(boxed), lo.end()),
                       std::vector<double>(hi.begin() + static_cast<long>(boxed), hi.end()), false});

  std::vector<double> zero_pose(pd, 0.0), zero_free(fd, 0.0);
  const auto probe_count = map.evaluate(zero_pose, zero_free, branch).probes.size();
  prog.add_constraint({"reachability", [](const EvalContext& ctx) { return ctx.probes; },
                       std::vector<double>(probe_count, kProbeMargin), std::vector<double>(probe_count, kInf),
                       false});

  add_joint_space_terms(prog, problem);
  return prog;
}

MatchedGuess match_initial_guess(std::span<const double> q0, const AnalyticIKMap& map) {
  MatchedGuess m = map.match(q0);
  const auto ik = map.evaluate(m.pose, m.free, m.branch);
  double err = 0.0;
  for (std::size_t i = 0; i < q0.size(); ++i) err = std::max(err, std::abs(ad::wrap_angle(ik.q[i] - q0[i])));
  double min_probe = kInf;
  for (double d : ik.probes) min_probe = std::min(min_probe, d);
  if (!(err <= 1e-8) || !(min_probe >= kProbeMargin)) {
    throw SingularConfiguration("match_initial_guess: initial configuration is at or near an IK singularity "
                                "(roundtrip error " +
                                std::to_string(err) + ", min probe " + std::to_string(min_probe) +
                                "); resample q0");
  }
  return m;
}

std::vector<double> new_program_point(const MatchedGuess& m) {
  std::vector<double> x = m.pose;
  x.insert(x.end(), m.free.begin(), m.free.end());
  return x;
}

void unwrap_toward(std::vector<double>& x, std::span<const double> target, const AnalyticIKMap& map) {
  for (std::size_t i : map.angular_pose_indices()) {
    if (i >= target.size() || i >= x.size()) continue;
    x[i] = target[i] + ad::wrap_angle(x[i] - target[i]);
  }
}

// ------------------------------------------------------------------ independent check

double JointCheck::max() const { return std::max({pose_error, limit_error, collision_error, user_error}); }

JointCheck check_joints(const IKProblem& problem, std::span<const double> q) {
  if (q.size() != problem.num_joints()) throw std::invalid_argument("check_joints: wrong joint count");
  JointCheck out;
  std::vector<double> pose;
  if (const auto* pc = std::get_if<PlanarChain>(&problem.chain)) {
    const Pose2 p = planar_fk(*pc, q);
    pose = {p.x, p.y, p.theta};
  } else {
    const Pose3 fk = std::get<KinematicChain>(problem.chain).forward(q);
    const auto p = pose_params(fk);
    pose.assign(p.begin(), p.end());
    if (problem.mode == TargetMode::full) {
      // Orientation compared on rotation matrices so Euler-angle ambiguity cannot hide an error.
      const Pose3& t = std::get<Pose3>(problem.target);
      double rot = 0.0;
      for (int i = 0; i < 9; ++i) rot = std::max(rot, std::abs(fk.rotation.m[i] - t.rotation.m[i]));
      out.pose_error = rot;
    }
  }
  const auto target = problem.target_params();
  const std::size_t pos_dim = problem.planar() ? 2 : 3;
  for (std::size_t i = 0; i < pos_dim; ++i) {
    if (problem.mode == TargetMode::box) {
      out.pose_error = std::max({out.pose_error, problem.p_lb[i] - pose[i], pose[i] - problem.p_ub[i]});
    } else {
      out.pose_error = std::max(out.pose_error, std::abs(pose[i] - target[i]));
    }
  }
  if (problem.planar() && problem.mode == TargetMode::full) {
    out.pose_error = std::max(out.pose_error, std::abs(ad::wrap_angle(pose[2] - target[2])));
  }
  const auto lo = problem.joint_lower();
  const auto hi = problem.joint_upper();
  for (std::size_t i = 0; i < q.size(); ++i) out.limit_error = std::max({out.limit_error, lo[i] - q[i], q[i] - hi[i]});
  if (problem.scene && !problem.scene->empty()) {
    const auto chain = spatial_chain(problem);
    for (double r : min_distance_residuals<double>(*chain, q, *problem.scene)) {
      out.collision_error = std::max(out.collision_error, -r);
    }
  }
  std::vector<DiffScalar> qs(q.begin(), q.end());
  for (const auto& g : problem.inequalities)
    for (const auto& v : g.fn(qs)) out.user_error = std::max(out.user_error, v.value());
  for (const auto& h : problem.equalities)
    for (const auto& v : h.fn(qs)) out.user_error = std::max(out.user_error, std::abs(v.value()));
  return out;
}

// ------------------------------------------------------------------ JSON

namespace {

std::vector<double> doubles(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("problem JSON: '") + what + "' must be an array");
  return j.get<std::vector<double>>();
}

/// Rows a.q - b, one per entry of {"a": [...], "b": value}.
JointConstraint linear_joint_rows(const nlohmann::json& j, const std::string& name, std::size_t n) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (const auto& row : j) {
    a.push_back(doubles(row.at("a"), "a"));
    if (a.back().size() != n) throw std::invalid_argument("problem JSON: constraint row length != joint count");
    b.push_back(row.value("b", 0.0));
  }
  JointConstraint c;
  c.name = name;
  c.rows = a.size();
  c.fn = [a, b](std::span<const DiffScalar> q) {
    std::vector<DiffScalar> out;
    for (std::size_t r = 0; r < a.size(); ++r) {
      DiffScalar s(-b[r]);
      for (std::size_t i = 0; i < q.size(); ++i)
        if (a[r][i] != 0.0) s += a[r][i] * q[i];
      out.push_back(s);
    }
    return out;
  };
  return c;
}

}  // namespace

IKProblem problem_from_json(const nlohmann::json& j, const std::string& base_dir) {
  IKProblem p;
  nlohmann::json chain_json;
  if (j.contains("chain_file")) {
    const auto path = std::filesystem::path(base_dir) / j.at("chain_file").get<std::string>();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open chain file " + path.string());
    chain_json = nlohmann::json::parse(in);
  } else {
    chain_json = j.at("chain");
  }
  if (chain_json.contains("planar")) {
    const auto& pj = chain_json.at("planar");
    const int n = pj.at("n").get<int>();
    if (n < 3) throw std::invalid_argument("problem JSON: planar chain needs n >= 3");
    const Pose2 base = pj.contains("base") ? pose2_from_json(pj.at("base")) : Pose2{};
    p.chain = PlanarChain::uniform(n, pj.value("limit", 2.0 * M_PI), base);
    p.target = pose2_from_json(j.at("target"));
  } else {
    p.chain = chain_from_json(chain_json);
    p.target = pose3_from_json(j.at("target"));
  }
  p.mode = target_mode_from_string(j.value("mode", std::string("full")));
  if (j.contains("p_lb")) p.p_lb = doubles(j.at("p_lb"), "p_lb");
  if (j.contains("p_ub")) p.p_ub = doubles(j.at("p_ub"), "p_ub");
  const std::size_t n = p.num_joints();
  if (j.contains("cost")) {
    const auto& cj = j.at("cost");
    std::vector<double> q_nom = cj.contains("q_nom") ? doubles(cj.at("q_nom"), "q_nom") : std::vector<double>(n, 0.0);
    CostSpec spec = CostSpec::identity(n, q_nom);
    if (cj.contains("weight")) {
      const auto& w = cj.at("weight");
      if (w.is_number()) {
        spec.weight *= w.get<double>();
      } else {
        for (std::size_t r = 0; r < n; ++r) {
          const auto row = doubles(w.at(r), "weight row");
          if (row.size() != n) throw std::invalid_argument("problem JSON: weight must be n x n");
          for (std::size_t c = 0; c < n; ++c)
            spec.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
      }
    }
    p.cost = spec;
  }
  if (j.contains("scene_file")) {
    const auto path = std::filesystem::path(base_dir) / j.at("scene_file").get<std::string>();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file " + path.string());
    p.scene = scene_from_json(nlohmann::json::parse(in));
  } else if (j.contains("scene")) {
    p.scene = scene_from_json(j.at("scene"));
  }
  if (j.contains("inequalities")) p.inequalities.push_back(linear_joint_rows(j.at("inequalities"), "linear", n));
  if (j.contains("equalities")) p.equalities.push_back(linear_joint_rows(j.at("equalities"), "linear", n));
  p.validate();
  return p;
}

}  // namespace ikform
