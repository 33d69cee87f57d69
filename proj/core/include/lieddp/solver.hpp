#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lieddp/constraints.hpp"

namespace lieddp {

/// Quadratic cost matrices. Validated: symmetric within 1e-12, final and
/// input weights positive definite, running state weight positive
/// semidefinite.
struct CostWeights {
  Eigen::MatrixXd final_state;    // 2n x 2n
  Eigen::MatrixXd running_state;  // 2n x 2n
  Eigen::MatrixXd running_input;  // m x m
};

void validate_weights(const CostWeights& w, int state_dim, int input_dim);

struct SolverConfig {
  double tol = 1e-6;  // inner convergence threshold on |L - L_prev|

  // Regularization schedule for the gain computation.
  double rho0 = 0.0;
  double rho_init = 1e-6;  // first nonzero value when escalating from zero
  double rho_factor = 10.0;
  double rho_max = 1e10;

  // Backtracking line search on the feedforward term.
  double alpha_factor = 0.5;
  double alpha_min = 1e-4;

  int max_inner_iters = 200;
  int max_outer_iters = 10;

  // Outer loop termination and multiplier schedule.
  double constraint_tol = 1e-4;
  double lambda0 = 0.0;
  double mu0 = 1.0;
  double gamma = 10.0;
  double mu_max = 1e8;

  // Stall safeguard: stop when the largest feedforward falls below this.
  double feedforward_tol = 1e-10;

  JacobianMode jacobian_mode = JacobianMode::Numeric;
  Discretization discretization = Discretization::Euler;
};

/// Time-varying affine policy du = K dx + d from the backward pass.
struct Policy {
  std::vector<Eigen::MatrixXd> gains;         // m x 2n each
  std::vector<Eigen::VectorXd> feedforwards;  // m each

  int horizon() const { return static_cast<int>(gains.size()); }
};

enum class SolveStatus { Converged, MaxIterations, Diverged, IllConditioned };

const char* to_string(SolveStatus status);

struct IterationRecord {
  int iter = 0;   // accepted-iteration index, 1-based, across outer rounds
  int outer = 0;  // outer (multiplier) round, 0-based
  double cost = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double max_violation = 0.0;
};

struct SolveResult {
  Trajectory trajectory;
  Policy policy;  // gains recomputed around the final trajectory
  std::vector<double> cost_history;           // accepted costs
  std::vector<double> max_violation_history;  // per outer round
  std::vector<IterationRecord> records;
  MultiplierState multipliers;
  SolveStatus status = SolveStatus::MaxIterations;
  int inner_iterations = 0;  // accepted iterations, all rounds
  int outer_iterations = 0;
  double final_cost = 0.0;      // augmented Lagrangian at termination
  double objective_cost = 0.0;  // quadratic objective without constraint terms
  double max_violation = 0.0;
};

struct Problem {
  std::shared_ptr<const DynamicsModel> model;
  State initial;
  State goal;
  CostWeights weights;
  std::vector<ConstraintSpec> constraints;
  SolverConfig config;
  int horizon = 0;
  double dt = 0.0;
};

/// Tracking error [log((Xg^-1 X))^vee; xi - xi_g] on the goal's tangent
/// space. Propagates BranchAmbiguityError for antipodal configurations.
Eigen::VectorXd goal_error(const State& goal, const State& current);

/// Same, with the deterministic branch choice at the logarithm cut.
Eigen::VectorXd goal_error_clamped(const State& goal, const State& current);

/// Objective plus multiplier and penalty terms over a whole trajectory:
///   sum_k [ 0.5 |dx_k|_SQ + 0.5 |u_k|_SU + (lambda + 0.5 Imu g_k)^T g_k ]
///   + 0.5 |dx_N|_SV + terminal constraint terms,
/// with the active-set diagonal Imu recomputed per step. Throws
/// DivergenceError if the value is not finite.
double augmented_lagrangian(const Trajectory& traj, const State& goal,
                            const CostWeights& weights,
                            const ConstraintStack& stack,
                            const MultiplierState& mult);

struct CostDerivatives {
  Eigen::VectorXd x, u;
  Eigen::MatrixXd xx, uu, ux;
};

/// Derivatives of the quadratic running cost at (dx, u); ux is zero.
CostDerivatives cost_derivatives(const Eigen::VectorXd& dx,
                                 const Eigen::VectorXd& u,
                                 const CostWeights& weights);

/// Per-step linearized data consumed by the backward pass. The solver
/// assembles these from a nominal trajectory; tests may construct them
/// directly for arbitrary linear systems.
struct BackwardStep {
  Eigen::MatrixXd A;  // discretized error-state transition, 2n x 2n
  Eigen::MatrixXd B;  // 2n x m
  Eigen::VectorXd dx;  // goal error at the nominal
  Eigen::VectorXd u;   // nominal input
  ConstraintEval con;  // empty values for unconstrained problems
};

struct BackwardTerminal {
  Eigen::VectorXd dx;
  ConstraintEval con;
};

struct BackwardResult {
  Policy policy;
  double expected_decrease = 0.0;  // sum_k d^T Q_u + 0.5 d^T Q_uu d
  double rho_used = 0.0;
  bool ok = true;  // false when rho exceeded rho_max
};

/// Value recursion over the linearized problem. Seeds the terminal
/// expansion from the final cost plus terminal constraint terms, then
/// iterates the Q expansions with the Gauss-Newton Hessian (no dynamics
/// curvature). If the regularized Q_uu is not positive definite the pass
/// escalates rho and restarts; rho is read and written through `rho`.
BackwardResult backward_pass(std::span<const BackwardStep> steps,
                             const BackwardTerminal& terminal,
                             const CostWeights& weights,
                             const MultiplierState& mult,
                             const SolverConfig& config, double& rho);

struct ForwardOutcome {
  Trajectory trajectory;
  double cost = 0.0;
  bool diverged = false;
};

/// Closed-loop rollout on the manifold: per step the deviation from the
/// nominal is measured as [log(X_k^-1 Xbar_k); xibar_k - xi_k], the input
/// corrected by K dx + alpha d, and the dynamics integrated forward. A
/// diverging candidate is returned with infinite cost.
ForwardOutcome forward_pass(const DynamicsModel& model, const Trajectory& nominal,
                            const Policy& policy, double alpha, const State& goal,
                            const CostWeights& weights, const ConstraintStack& stack,
                            const MultiplierState& mult);

/// Full augmented-Lagrangian solve: inner DDP iterations to cost
/// convergence, outer multiplier updates until the worst constraint value
/// falls below the constraint tolerance. Failure modes are encoded in the
/// result status, not thrown.
SolveResult solve(const Problem& problem);

}  // namespace lieddp
