#include "lieddp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lieddp {

namespace {

constexpr double kTwistDivergenceBound = 1e6;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Eigen::VectorXd goal_error_impl(const State& goal, const State& current,
                                bool clamp) {
  const LieGroup& g = *goal.config.group;
  require(current.config.group == &g, "goal_error: group mismatch");
  const GroupElement rel = compose(g.inverse(goal.config), current.config);
  const int n = g.dim();
  Eigen::VectorXd dx(2 * n);
  dx.head(n) = clamp ? g.log_clamped(rel) : g.log_map(rel);
  dx.tail(n) = current.twist - goal.twist;
  return dx;
}

double step_al_terms(const Eigen::VectorXd& g, const MultiplierState& mult) {
  const Eigen::VectorXd imu = penalty_diagonal(g, mult);
  return mult.lambda.head(g.size()).dot(g) + 0.5 * g.dot(imu.cwiseProduct(g));
}

struct ViolationScan {
  double worst = 0.0;                         // max over all rows and steps
  std::vector<Eigen::VectorXd> step_values;   // running stacks then terminal
};

ViolationScan scan_constraints(const ConstraintStack& stack, const Trajectory& traj) {
  ViolationScan scan;
  if (stack.empty()) return scan;
  scan.worst = -kInf;
  const int N = traj.horizon();
  scan.step_values.reserve(N + 1);
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXd g = stack.values(traj.states[k].config, traj.states[k].twist,
                                     traj.inputs[k]);
    if (g.size() > 0) scan.worst = std::max(scan.worst, g.maxCoeff());
    scan.step_values.push_back(std::move(g));
  }
  Eigen::VectorXd gN = stack.terminal_values(traj.states[N].config,
                                             traj.states[N].twist);
  if (gN.size() > 0) scan.worst = std::max(scan.worst, gN.maxCoeff());
  scan.step_values.push_back(std::move(gN));
  return scan;
}

double escalate_rho(double rho, const SolverConfig& cfg) {
  return rho == 0.0 ? cfg.rho_init : rho * cfg.rho_factor;
}

}  // namespace

void validate_weights(const CostWeights& w, int state_dim, int input_dim) {
  auto check = [](const Eigen::MatrixXd& M, int dim, bool strict, const char* name) {
    if (M.rows() != dim || M.cols() != dim) {
      throw std::invalid_argument(std::string("CostWeights: ") + name +
                                  " has the wrong size");
    }
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument(std::string("CostWeights: ") + name +
                                  " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (strict ? (min_eig <= 0.0) : (min_eig < -1e-12)) {
      throw std::invalid_argument(std::string("CostWeights: ") + name +
                                  (strict ? " must be positive definite"
                                          : " must be positive semidefinite"));
    }
  };
  check(w.final_state, state_dim, true, "final_state");
  check(w.running_state, state_dim, false, "running_state");
  check(w.running_input, input_dim, true, "running_input");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max-iters";
    case SolveStatus::Diverged:
      return "diverged";
    case SolveStatus::IllConditioned:
      return "ill-conditioned";
  }
  return "unknown";
}

Eigen::VectorXd goal_error(const State& goal, const State& current) {
  return goal_error_impl(goal, current, /*clamp=*/false);
}

Eigen::VectorXd goal_error_clamped(const State& goal, const State& current) {
  return goal_error_impl(goal, current, /*clamp=*/true);
}

double augmented_lagrangian(const Trajectory& traj, const State& goal,
                            const CostWeights& weights,
                            const ConstraintStack& stack,
                            const MultiplierState& mult) {
  const int N = traj.horizon();
  double total = 0.0;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd dx = goal_error_clamped(goal, traj.states[k]);
    const Eigen::VectorXd& u = traj.inputs[k];
    total += 0.5 * dx.dot(weights.running_state * dx) +
             0.5 * u.dot(weights.running_input * u);
    if (!stack.empty()) {
      total += step_al_terms(
          stack.values(traj.states[k].config, traj.states[k].twist, u), mult);
    }
  }
  const Eigen::VectorXd dxN = goal_error_clamped(goal, traj.states[N]);
  total += 0.5 * dxN.dot(weights.final_state * dxN);
  if (!stack.empty()) {
    total += step_al_terms(
        stack.terminal_values(traj.states[N].config, traj.states[N].twist), mult);
  }
  if (!std::isfinite(total)) {
    throw DivergenceError("augmented_lagrangian: value is not finite", N);
  }
  return total;
}

CostDerivatives cost_derivatives(const Eigen::VectorXd& dx,
                                 const Eigen::VectorXd& u,
                                 const CostWeights& weights) {
  CostDerivatives d;
  d.x = weights.running_state * dx;
  d.u = weights.running_input * u;
  d.xx = weights.running_state;
  d.uu = weights.running_input;
  d.ux = Eigen::MatrixXd::Zero(u.size(), dx.size());
  return d;
}

BackwardResult backward_pass(std::span<const BackwardStep> steps,
                             const BackwardTerminal& terminal,
                             const CostWeights& weights,
                             const MultiplierState& mult,
                             const SolverConfig& config, double& rho) {
  const int N = static_cast<int>(steps.size());
  require(N >= 1, "backward_pass: empty horizon");
  const auto m = weights.running_input.rows();

  BackwardResult out;
  out.policy.gains.assign(N, Eigen::MatrixXd());
  out.policy.feedforwards.assign(N, Eigen::VectorXd());

  while (true) {
    out.expected_decrease = 0.0;

    Eigen::VectorXd vx = weights.final_state * terminal.dx;
    Eigen::MatrixXd vxx = weights.final_state;
    if (terminal.con.values.size() > 0) {
      const Eigen::VectorXd& g = terminal.con.values;
      const Eigen::VectorXd imu = penalty_diagonal(g, mult);
      vx += terminal.con.jac_x.transpose() *
            (mult.lambda.head(g.size()) + imu.cwiseProduct(g));
      vxx += terminal.con.jac_x.transpose() * imu.asDiagonal() * terminal.con.jac_x;
    }

    bool restarted = false;
    for (int k = N - 1; k >= 0; --k) {
      const BackwardStep& s = steps[k];
      const CostDerivatives cd = cost_derivatives(s.dx, s.u, weights);
      Eigen::VectorXd qx = cd.x + s.A.transpose() * vx;
      Eigen::VectorXd qu = cd.u + s.B.transpose() * vx;
      Eigen::MatrixXd qxx = cd.xx + s.A.transpose() * vxx * s.A;
      Eigen::MatrixXd quu = cd.uu + s.B.transpose() * vxx * s.B;
      Eigen::MatrixXd qux = s.B.transpose() * vxx * s.A;
      if (s.con.values.size() > 0) {
        const Eigen::VectorXd& g = s.con.values;
        const Eigen::VectorXd imu = penalty_diagonal(g, mult);
        const Eigen::VectorXd lam_pen = mult.lambda + imu.cwiseProduct(g);
        qx += s.con.jac_x.transpose() * lam_pen;
        qu += s.con.jac_u.transpose() * lam_pen;
        qxx += s.con.jac_x.transpose() * imu.asDiagonal() * s.con.jac_x;
        quu += s.con.jac_u.transpose() * imu.asDiagonal() * s.con.jac_u;
        qux += s.con.jac_u.transpose() * imu.asDiagonal() * s.con.jac_x;
      }

      Eigen::MatrixXd quu_reg =
          quu + rho * Eigen::MatrixXd::Identity(m, m);
      const Eigen::LLT<Eigen::MatrixXd> llt(quu_reg);
      if (llt.info() != Eigen::Success) {
        if (rho >= config.rho_max) {
          out.ok = false;
          out.rho_used = rho;
          return out;
        }
        rho = escalate_rho(rho, config);
        restarted = true;
        break;
      }
      Eigen::MatrixXd gain = -llt.solve(qux);
      Eigen::VectorXd ff = -llt.solve(qu);
      out.expected_decrease += ff.dot(qu) + 0.5 * ff.dot(quu_reg * ff);

      vx = qx + gain.transpose() * (quu * ff + qu) + qux.transpose() * ff;
      vxx = qxx + gain.transpose() * quu * gain + gain.transpose() * qux +
            qux.transpose() * gain;
      vxx = 0.5 * (vxx + vxx.transpose());

      out.policy.gains[k] = std::move(gain);
      out.policy.feedforwards[k] = std::move(ff);
    }
    if (!restarted) break;
  }
  out.rho_used = rho;
  return out;
}

ForwardOutcome forward_pass(const DynamicsModel& model, const Trajectory& nominal,
                            const Policy& policy, double alpha, const State& goal,
                            const CostWeights& weights, const ConstraintStack& stack,
                            const MultiplierState& mult) {
  require(alpha >= 0.0 && alpha <= 1.0, "forward_pass: alpha must be in [0, 1]");
  const LieGroup& g = model.group();
  const int N = nominal.horizon();
  const int n = g.dim();

  ForwardOutcome out;
  out.trajectory.dt = nominal.dt;
  out.trajectory.states.reserve(N + 1);
  out.trajectory.inputs.reserve(N);
  out.trajectory.states.push_back(nominal.states[0]);

  Eigen::VectorXd dx(2 * n);
  for (int k = 0; k < N; ++k) {
    const State& cur = out.trajectory.states.back();
    dx.head(n) = g.log_clamped(
        compose(g.inverse(nominal.states[k].config), cur.config));
    dx.tail(n) = cur.twist - nominal.states[k].twist;

    const Eigen::VectorXd u =
        nominal.inputs[k] + policy.gains[k] * dx + alpha * policy.feedforwards[k];
    const Eigen::VectorXd xi_next =
        cur.twist + model.twist_derivative(cur.twist, u) * nominal.dt;
    if (!xi_next.allFinite() ||
        xi_next.cwiseAbs().maxCoeff() > kTwistDivergenceBound) {
      out.diverged = true;
      out.cost = kInf;
      return out;
    }
    State next;
    next.twist = xi_next;
    next.config = compose(cur.config, g.exp_map(xi_next * nominal.dt));
    out.trajectory.inputs.push_back(u);
    out.trajectory.states.push_back(std::move(next));
  }

  try {
    out.cost = augmented_lagrangian(out.trajectory, goal, weights, stack, mult);
  } catch (const DivergenceError&) {
    out.diverged = true;
    out.cost = kInf;
  }
  return out;
}

SolveResult solve(const Problem& problem) {
  require(problem.model != nullptr, "solve: missing dynamics model");
  require(problem.horizon >= 1, "solve: horizon must be at least 1");
  require(problem.dt > 0.0, "solve: dt must be positive");
  const DynamicsModel& model = *problem.model;
  const LieGroup& group = model.group();
  const int N = problem.horizon;
  const int m = model.input_dim();
  const SolverConfig& cfg = problem.config;
  validate_weights(problem.weights, 2 * group.dim(), m);
  require(problem.initial.config.group == &group &&
              problem.goal.config.group == &group,
          "solve: state group does not match the model");

  const ConstraintStack stack(problem.constraints, model, cfg.jacobian_mode,
                              /*clamp_log=*/true);
  const int p = stack.rows();

  SolveResult result;
  result.multipliers.lambda = Eigen::VectorXd::Constant(p, cfg.lambda0);
  result.multipliers.mu = Eigen::VectorXd::Constant(p, cfg.mu0);
  result.multipliers.gamma = cfg.gamma;
  result.multipliers.mu_max = cfg.mu_max;

  Trajectory nominal;
  try {
    const std::vector<Eigen::VectorXd> zero_inputs(N, Eigen::VectorXd::Zero(m));
    nominal = rollout(model, problem.initial, zero_inputs, problem.dt);
  } catch (const DivergenceError&) {
    result.status = SolveStatus::Diverged;
    return result;
  }

  double cost = augmented_lagrangian(nominal, problem.goal, problem.weights,
                                     stack, result.multipliers);

  auto assemble_steps = [&](const Trajectory& traj, std::vector<BackwardStep>& steps,
                            BackwardTerminal& terminal) {
    steps.resize(N);
    for (int k = 0; k < N; ++k) {
      const State& s = traj.states[k];
      const LinearizedTwist lin = model.linearize_twist(s.twist);
      // Euler mode linearizes the actual discrete update; zero-order hold
      // integrates the continuous error-state matrices instead.
      const PerturbedSystem disc =
          cfg.discretization == Discretization::Euler
              ? rollout_jacobians(group, s.twist, lin, traj.dt)
              : discretize(perturbed_system(group, s.twist, lin), traj.dt,
                           Discretization::ZeroOrderHold);
      steps[k].A = disc.A;
      steps[k].B = disc.B;
      steps[k].dx = goal_error_clamped(problem.goal, s);
      steps[k].u = traj.inputs[k];
      if (!stack.empty()) {
        steps[k].con = stack.eval(s.config, s.twist, traj.inputs[k]);
      }
    }
    terminal.dx = goal_error_clamped(problem.goal, traj.states[N]);
    if (!stack.empty()) {
      terminal.con =
          stack.terminal_eval(traj.states[N].config, traj.states[N].twist);
    }
  };

  std::vector<BackwardStep> steps;
  BackwardTerminal terminal;
  Policy last_policy;
  bool stopped = false;

  // Snapshot of the iterate before a multiplier update, used to back out
  // of rounds the update ruins (see the regression guard below).
  struct RoundSnapshot {
    Trajectory nominal;
    MultiplierState multipliers;
    double cost = 0.0;
    double violation = 0.0;
    bool converged = false;
    int inner_iterations = 0;
    std::size_t records = 0;
  };
  RoundSnapshot snapshot;
  bool have_snapshot = false;

  for (int outer = 0; outer < cfg.max_outer_iters && !stopped; ++outer) {
    result.outer_iterations = outer + 1;
    double rho = cfg.rho0;
    double prev_cost = kInf;
    bool inner_converged = false;

    for (int inner = 0; inner < cfg.max_inner_iters; ++inner) {
      assemble_steps(nominal, steps, terminal);
      const BackwardResult bp = backward_pass(steps, terminal, problem.weights,
                                              result.multipliers, cfg, rho);
      if (!bp.ok) {
        result.status = SolveStatus::IllConditioned;
        stopped = true;
        break;
      }
      last_policy = bp.policy;

      double alpha = 1.0;
      bool accepted = false;
      ForwardOutcome candidate;
      while (alpha >= cfg.alpha_min) {
        candidate = forward_pass(model, nominal, bp.policy, alpha, problem.goal,
                                 problem.weights, stack, result.multipliers);
        if (!candidate.diverged && candidate.cost <= cost) {
          accepted = true;
          break;
        }
        alpha *= cfg.alpha_factor;
      }

      if (!accepted) {
        // Unsuccessful forward pass: regularize harder and redo the
        // backward pass around the same nominal. If regularization is
        // exhausted no direction improves the cost any further; treat the
        // round as converged at this nominal.
        if (rho >= cfg.rho_max) {
          inner_converged = true;
          break;
        }
        rho = escalate_rho(rho, cfg);
        continue;
      }

      prev_cost = cost;
      cost = candidate.cost;
      nominal = std::move(candidate.trajectory);
      rho = cfg.rho0;
      ++result.inner_iterations;

      IterationRecord rec;
      rec.iter = result.inner_iterations;
      rec.outer = outer;
      rec.cost = cost;
      rec.alpha = alpha;
      rec.rho = bp.rho_used;
      rec.max_violation = scan_constraints(stack, nominal).worst;
      result.records.push_back(rec);
      result.cost_history.push_back(cost);

      if (std::abs(prev_cost - cost) < cfg.tol) {
        inner_converged = true;
        break;
      }
      double max_ff = 0.0;
      for (const Eigen::VectorXd& d : bp.policy.feedforwards) {
        max_ff = std::max(max_ff, d.cwiseAbs().maxCoeff());
      }
      if (max_ff < cfg.feedforward_tol) {
        inner_converged = true;
        break;
      }
    }
    if (stopped) break;

    const ViolationScan scan = scan_constraints(stack, nominal);

    // Regression guard: with multipliers shared across time steps, a
    // positive multiplier keeps its row's penalty active everywhere, which
    // can pull whole stretches of the trajectory onto constraint
    // boundaries after an update. If this round ended an order of
    // magnitude worse than the one before the update, reject it and
    // return the earlier iterate.
    if (have_snapshot &&
        scan.worst > 10.0 * std::max(snapshot.violation, cfg.constraint_tol)) {
      nominal = std::move(snapshot.nominal);
      result.multipliers = std::move(snapshot.multipliers);
      cost = snapshot.cost;
      result.inner_iterations = snapshot.inner_iterations;
      result.records.resize(snapshot.records);
      result.cost_history.resize(snapshot.records);
      result.status = snapshot.violation < cfg.constraint_tol && snapshot.converged
                          ? SolveStatus::Converged
                          : SolveStatus::MaxIterations;
      result.max_violation = snapshot.violation;
      break;
    }

    result.max_violation_history.push_back(scan.worst);
    result.max_violation = scan.worst;

    if (stack.empty() || scan.worst < cfg.constraint_tol) {
      result.status =
          inner_converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
      break;
    }
    if (outer == cfg.max_outer_iters - 1) {
      result.status = SolveStatus::MaxIterations;
      break;
    }
    snapshot = RoundSnapshot{nominal,
                             result.multipliers,
                             cost,
                             scan.worst,
                             inner_converged,
                             result.inner_iterations,
                             result.records.size()};
    have_snapshot = true;
    result.multipliers = update_multipliers(result.multipliers, scan.step_values);
    cost = augmented_lagrangian(nominal, problem.goal, problem.weights, stack,
                                result.multipliers);
  }

  // Recompute the policy around the final trajectory so the shipped gains
  // match the shipped nominal.
  assemble_steps(nominal, steps, terminal);
  double rho_final = cfg.rho0;
  const BackwardResult final_bp = backward_pass(
      steps, terminal, problem.weights, result.multipliers, cfg, rho_final);
  result.policy = final_bp.ok ? final_bp.policy : last_policy;

  result.trajectory = std::move(nominal);
  result.final_cost = cost;
  result.objective_cost =
      augmented_lagrangian(result.trajectory, problem.goal, problem.weights,
                           ConstraintStack(), MultiplierState());
  if (result.max_violation_history.empty()) {
    const ViolationScan scan = scan_constraints(stack, result.trajectory);
    result.max_violation_history.push_back(scan.worst);
    result.max_violation = scan.worst;
  }
  return result;
}

}  // namespace lieddp
