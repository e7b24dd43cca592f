#include "ikform/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ikform {

void SolverOptions::validate() const {
  if (!(feasibility_tol > 0.0) || !(optimality_tol > 0.0) || max_outer <= 0 || max_inner <= 0 ||
      !(initial_penalty > 0.0) || !(penalty_growth > 1.0) || !(required_progress > 1.0) ||
      !(max_penalty >= initial_penalty) || !(timeout_s >= 0.0)) {
    throw std::invalid_argument("SolverOptions: tolerances, iteration counts and penalties must be positive");
  }
}

void from_json(const nlohmann::json& j, SolverOptions& o) {
  o.feasibility_tol = j.value("feasibility_tol", o.feasibility_tol);
  o.optimality_tol = j.value("optimality_tol", o.optimality_tol);
  o.max_outer = j.value("max_outer", o.max_outer);
  o.max_inner = j.value("max_inner", o.max_inner);
  o.initial_penalty = j.value("initial_penalty", o.initial_penalty);
  o.penalty_growth = j.value("penalty_growth", o.penalty_growth);
  o.required_progress = j.value("required_progress", o.required_progress);
  o.max_penalty = j.value("max_penalty", o.max_penalty);
  o.timeout_s = j.value("timeout_s", o.timeout_s);
  o.validate();
}

void to_json(nlohmann::json& j, const SolverOptions& o) {
  j = {{"feasibility_tol", o.feasibility_tol}, {"optimality_tol", o.optimality_tol},
       {"max_outer", o.max_outer},             {"max_inner", o.max_inner},
       {"initial_penalty", o.initial_penalty}, {"penalty_growth", o.penalty_growth},
       {"required_progress", o.required_progress}, {"max_penalty", o.max_penalty},
       {"timeout_s", o.timeout_s}};
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved:
      return "solved";
    case SolveStatus::infeasible_stalled:
      return "infeasible-stalled";
    case SolveStatus::timeout:
      return "timeout";
    case SolveStatus::evaluation_failure:
      return "evaluation-failure";
  }
  return "infeasible-stalled";
}

SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "solved") return SolveStatus::solved;
  if (s == "infeasible-stalled") return SolveStatus::infeasible_stalled;
  if (s == "timeout") return SolveStatus::timeout;
  if (s == "evaluation-failure") return SolveStatus::evaluation_failure;
  throw std::invalid_argument("unknown solve status '" + s + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

/// Augmented Lagrangian bookkeeping for one program.
class Merit {
 public:
  explicit Merit(const NLProgram& prog)
      : lo_(prog.row_lower()), hi_(prog.row_upper()), linear_(prog.row_linear()) {
    const auto m = static_cast<Eigen::Index>(lo_.size());
    lam_ = Eigen::VectorXd::Zero(m);
    mu_lo_ = Eigen::VectorXd::Zero(m);
    mu_hi_ = Eigen::VectorXd::Zero(m);
  }

  double rho = 10.0;

  bool equality(Eigen::Index i) const { return lo_[i] == hi_[i]; }
  bool linear_equality(Eigen::Index i) const { return equality(i) && linear_[i]; }

  /// Phi value; fills w (row weights in the gradient) and the active-row mask when requested.
  double value(const ProgramEval& ev, Eigen::VectorXd* w = nullptr, std::vector<char>* active = nullptr) const {
    const auto m = ev.rows.size();
    double phi = ev.cost;
    if (w) *w = Eigen::VectorXd::Zero(m);
    if (active) active->assign(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double c = ev.rows[i];
      double wi = 0.0;
      bool act = false;
      if (equality(i)) {
        const double h = c - lo_[i];
        phi += lam_[i] * h + 0.5 * rho * h * h;
        wi = lam_[i] + rho * h;
        act = true;
      } else {
        if (std::isfinite(lo_[i])) {
          const double t = mu_lo_[i] - rho * (c - lo_[i]);
          if (t > 0.0) {
            phi += (t * t - mu_lo_[i] * mu_lo_[i]) / (2.0 * rho);
            wi -= t;
            act = true;
          } else {
            phi -= mu_lo_[i] * mu_lo_[i] / (2.0 * rho);
          }
        }
        if (std::isfinite(hi_[i])) {
          const double t = mu_hi_[i] - rho * (hi_[i] - c);
          if (t > 0.0) {
            phi += (t * t - mu_hi_[i] * mu_hi_[i]) / (2.0 * rho);
            wi += t;
            act = true;
          } else {
            phi -= mu_hi_[i] * mu_hi_[i] / (2.0 * rho);
          }
        }
      }
      if (w) (*w)[i] = wi;
      if (active) (*active)[static_cast<std::size_t>(i)] = act ? 1 : 0;
    }
    return phi;
  }

  void update_multipliers(const ProgramEval& ev) {
    constexpr double kCap = 1e12;
    for (Eigen::Index i = 0; i < ev.rows.size(); ++i) {
      const double c = ev.rows[i];
      if (equality(i)) {
        lam_[i] = std::clamp(lam_[i] + rho * (c - lo_[i]), -kCap, kCap);
        continue;
      }
      if (std::isfinite(lo_[i])) mu_lo_[i] = std::min(kCap, std::max(0.0, mu_lo_[i] - rho * (c - lo_[i])));
      if (std::isfinite(hi_[i])) mu_hi_[i] = std::min(kCap, std::max(0.0, mu_hi_[i] - rho * (hi_[i] - c)));
    }
  }

  double row_lower(Eigen::Index i) const { return lo_[i]; }

 private:
  std::vector<double> lo_, hi_;
  std::vector<bool> linear_;
  Eigen::VectorXd lam_, mu_lo_, mu_hi_;
};

struct Iterate {
  Eigen::VectorXd x;
  ProgramEval ev;
  double phi = 0.0;
  Eigen::VectorXd w;
  std::vector<char> active;
  Eigen::VectorXd grad;
};

enum class InnerExit { converged, iteration_limit, stalled, timeout, feasible };

class Solver {
 public:
  Solver(const NLProgram& prog, const SolverOptions& opts)
      : prog_(prog), opts_(opts), merit_(prog), n_(static_cast<Eigen::Index>(prog.num_vars())) {
    lo_ = Eigen::Map<const Eigen::VectorXd>(prog.x_lower.data(), n_);
    hi_ = Eigen::Map<const Eigen::VectorXd>(prog.x_upper.data(), n_);
    merit_.rho = opts.initial_penalty;
    start_ = Clock::now();
  }

  SolveResult run(std::span<const double> x0) {
    SolveResult res;
    if (x0.size() != prog_.num_vars()) throw std::invalid_argument("solve: x0 has the wrong size");
    Iterate it;
    it.x = project(Eigen::Map<const Eigen::VectorXd>(x0.data(), n_));
    it.ev = eval(it.x, true);
    if (!it.ev.finite || !it.x.allFinite()) {
      res.status = SolveStatus::evaluation_failure;
      res.x_star.assign(it.x.data(), it.x.data() + n_);
      res.cost = it.ev.cost;
      res.max_constraint_violation = kInf;
      res.wall_time = elapsed();
      return res;
    }
    refresh(it);

    double prev_viol = violation(it);
    bool have_best = false;
    Iterate best;
    int stagnant = 0;
    bool timed_out = false;
    bool early_feasible = false;

    for (int k = 0; k < opts_.max_outer; ++k) {
      res.outer_iterations = k + 1;
      const double omega = std::max(opts_.optimality_tol, std::pow(0.1, k + 1));
      const InnerExit exit = inner(it, omega, res.inner_iterations_total);
      const double viol = violation(it);
      res.violation_history.push_back(viol);
      if (viol <= opts_.feasibility_tol && (!have_best || it.ev.cost < best.ev.cost)) {
        best = it;
        have_best = true;
      }
      if (exit == InnerExit::timeout) {
        timed_out = true;
        break;
      }
      if (exit == InnerExit::feasible) {
        early_feasible = true;
        break;
      }
      const double stat = stationarity(it);
      if (viol <= opts_.feasibility_tol && (!prog_.has_cost || stat <= opts_.optimality_tol)) break;

      merit_.update_multipliers(it.ev);
      if (viol > opts_.feasibility_tol && viol > prev_viol / opts_.required_progress) {
        if (merit_.rho >= opts_.max_penalty) {
          if (++stagnant >= 3) break;
        }
        merit_.rho = std::min(merit_.rho * opts_.penalty_growth, opts_.max_penalty);
      } else {
        stagnant = 0;
      }
      prev_viol = std::min(prev_viol, viol);
      refresh(it);
    }

    polish_linear_rows(it);
    if (have_best && violation(it) > opts_.feasibility_tol) {
      it = best;
      polish_linear_rows(it);
    }

    res.x_star.assign(it.x.data(), it.x.data() + n_);
    res.cost = it.ev.cost;
    res.max_constraint_violation = violation(it);
    refresh(it);
    res.stationarity = stationarity(it);
    const bool feasible = res.max_constraint_violation <= opts_.feasibility_tol;
    if (feasible) {
      res.status = SolveStatus::solved;
      res.optimal = !prog_.has_cost || early_feasible || res.stationarity <= opts_.optimality_tol;
    } else {
      res.status = timed_out ? SolveStatus::timeout : SolveStatus::infeasible_stalled;
    }
    res.wall_time = elapsed();
    return res;
  }

 private:
  const NLProgram& prog_;
  SolverOptions opts_;
  Merit merit_;
  Eigen::Index n_;
  Eigen::VectorXd lo_, hi_;
  Clock::time_point start_;

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  bool out_of_time() const { return opts_.timeout_s > 0.0 && elapsed() > opts_.timeout_s; }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lo_).cwiseMin(hi_); }

  ProgramEval eval(const Eigen::VectorXd& x, bool derivatives) const {
    return prog_.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(n_)), derivatives);
  }

  double violation(const Iterate& it) const {
    return prog_.max_violation(it.ev, std::span<const double>(it.x.data(), static_cast<std::size_t>(n_)));
  }

  /// Recomputes phi, weights and gradient for the current multipliers.
  void refresh(Iterate& it) const {
    it.phi = merit_.value(it.ev, &it.w, &it.active);
    it.grad = it.ev.cost_grad;
    if (it.w.size() > 0) it.grad += it.ev.jacobian.transpose() * it.w;
  }

  double stationarity(const Iterate& it) const {
    return (it.x - project(it.x - it.grad)).lpNorm<Eigen::Infinity>();
  }

  InnerExit inner(Iterate& it, double omega, int& total_iters) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n_, n_);
    bool fresh_b = true;
    const bool feasibility_only = !prog_.has_cost;
    for (int iter = 0; iter < opts_.max_inner; ++iter) {
      if (out_of_time()) return InnerExit::timeout;
      if (feasibility_only && violation(it) <= opts_.feasibility_tol) return InnerExit::feasible;
      if (stationarity(it) <= omega) return InnerExit::converged;

      // Free variables: those not pinned at a bound by the gradient sign.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n_; ++i) {
        const bool at_lo = it.x[i] <= lo_[i] && it.grad[i] > 0.0;
        const bool at_hi = it.x[i] >= hi_[i] && it.grad[i] < 0.0;
        if (!at_lo && !at_hi) free.push_back(i);
      }
      if (free.empty()) return InnerExit::converged;

      Eigen::MatrixXd H = B;
      for (Eigen::Index r = 0; r < it.ev.rows.size(); ++r) {
        if (!it.active[static_cast<std::size_t>(r)]) continue;
        const Eigen::RowVectorXd jr = it.ev.jacobian.row(r);
        H.noalias() += merit_.rho * jr.transpose() * jr;
      }
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Hf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = it.grad[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) Hf(a, b) = H(free[a], free[b]);
      }
      Eigen::VectorXd df = newton_step(Hf, gf);
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
      for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];

      Iterate next;
      if (!line_search(it, d, next)) {
        if (fresh_b) return InnerExit::stalled;
        B.setIdentity();
        fresh_b = true;
        continue;
      }
      ++total_iters;
      bfgs_update(B, it, next);
      fresh_b = false;
      it = std::move(next);
    }
    return InnerExit::iteration_limit;
  }

  static Eigen::VectorXd newton_step(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
    const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    double shift = 0.0;
    const auto n = H.rows();
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(H + shift * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        Eigen::VectorXd d = llt.solve(-g);
        if (d.allFinite() && d.dot(g) < 0.0) return d;
      }
      shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0;
    }
    return -g;
  }

  bool line_search(const Iterate& it, const Eigen::VectorXd& d, Iterate& next) const {
    double alpha = 1.0;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      const Eigen::VectorXd xt = project(it.x + alpha * d);
      const Eigen::VectorXd s = xt - it.x;
      const double slope = it.grad.dot(s);
      if (!(slope < 0.0)) continue;
      const ProgramEval trial = eval(xt, false);
      if (!trial.finite) continue;  // IK map undefined there: reject the step
      const double phi = merit_.value(trial);
      if (std::isfinite(phi) && phi <= it.phi + 1e-4 * slope) {
        next.x = xt;
        next.ev = eval(xt, true);
        if (!next.ev.finite) continue;
        refresh(next);
        return true;
      }
    }
    return false;
  }

  /// Damped BFGS on the Lagrangian part of the merit Hessian.
  static void bfgs_update(Eigen::MatrixXd& B, const Iterate& old, const Iterate& next) {
    const Eigen::VectorXd s = next.x - old.x;
    Eigen::VectorXd y = next.ev.cost_grad - old.ev.cost_grad;
    if (next.w.size() > 0) y += (next.ev.jacobian - old.ev.jacobian).transpose() * next.w;
    const Eigen::VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    if (!(sBs > 1e-300)) return;
    double sy = s.dot(y);
    if (sy < 0.2 * sBs) {
      const double theta = 0.8 * sBs / (sBs - sy);
      y = theta * y + (1.0 - theta) * Bs;
      sy = s.dot(y);
    }
    if (!(sy > 1e-300) || !y.allFinite()) return;
    B += y * y.transpose() / sy - Bs * Bs.transpose() / sBs;
  }

  /// Least-squares correction onto the affine set of linear equality rows.
  void polish_linear_rows(Iterate& it) const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < it.ev.rows.size(); ++r)
      if (merit_.linear_equality(r)) rows.push_back(r);
    if (rows.empty() || !it.ev.finite) return;
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd A(m, n_);
    Eigen::VectorXd res(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      A.row(a) = it.ev.jacobian.row(rows[a]);
      res[a] = it.ev.rows[rows[a]] - merit_.row_lower(rows[a]);
    }
    const Eigen::VectorXd dx = -A.completeOrthogonalDecomposition().solve(res);
    if (!dx.allFinite()) return;
    Iterate cand;
    cand.x = project(it.x + dx);
    cand.ev = eval(cand.x, true);
    if (!cand.ev.finite) return;
    if (violation(cand) <= std::max(violation(it), opts_.feasibility_tol)) it = std::move(cand);
  }
};

}  // namespace

SolveResult solve(const NLProgram& program, std::span<const double> x0, const SolverOptions& opts) {
  opts.validate();
  Solver solver(program, opts);
  return solver.run(x0);
}

double check_gradients(const NLProgram& program, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradients: step must be positive");
  const ProgramEval base = program.evaluate(x, true);
  if (!base.finite) return kInf;
  std::vector<double> xp(x.begin(), x.end());
  double worst = 0.0;
  auto rel = [](double a, double fd) { return std::abs(a - fd) / std::max(1.0, std::abs(fd)); };
  for (std::size_t j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const ProgramEval plus = program.evaluate(xp, false);
    xp[j] = x[j] - h;
    const ProgramEval minus = program.evaluate(xp, false);
    xp[j] = x[j];
    if (!plus.finite || !minus.finite) return kInf;
    const auto jj = static_cast<Eigen::Index>(j);
    if (program.has_cost) worst = std::max(worst, rel(base.cost_grad[jj], (plus.cost - minus.cost) / (2.0 * h)));
    for (Eigen::Index r = 0; r < base.rows.size(); ++r) {
      worst = std::max(worst, rel(base.jacobian(r, jj), (plus.rows[r] - minus.rows[r]) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace ikform
