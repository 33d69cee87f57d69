#pragma once

#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lieddp/dynamics.hpp"

namespace lieddp {

enum class BoundSide { Upper, Lower };

/// Single-sided scalar bound on one twist component. Feasible means g <= 0
/// with g = xi_axis - value for an upper bound and value - xi_axis for a
/// lower bound.
struct VelocityBound {
  int axis = 0;  // index into the twist (SE3: 0..2 angular, 3..5 linear)
  double value = 0.0;
  BoundSide side = BoundSide::Upper;
};

/// Which block of the tangent offset a configuration-avoidance ball acts on.
enum class AvoidanceComponents { Full, Rotation, Position };

/// How the position block of the offset is measured. Euclidean takes the
/// translation of the relative configuration X^-1 Xc, whose norm is the
/// actual workspace distance to the center. TangentLog takes the
/// translational rows of log(X^-1 Xc), which warps distances by the inverse
/// left Jacobian once the relative rotation is large.
enum class PositionMetric { Euclidean, TangentLog };

/// Keep-out ball (or ellipsoid) around a restricted configuration.
/// Uniform radius: g = r^2 - |offset|^2, so g <= 0 iff the offset leaves
/// the ball. Per-axis radii: g = 1 - sum((offset_i / r_i)^2).
struct ConfigAvoidance {
  GroupElement center;
  double radius = 0.0;
  Eigen::VectorXd radii;  // optional per-axis radii; empty for a ball
  AvoidanceComponents components = AvoidanceComponents::Full;
  PositionMetric metric = PositionMetric::TangentLog;
};

/// Componentwise box on the input, folded into the inequality stack as
/// g = [u - upper; lower - u].
struct InputBound {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

using ConstraintSpec = std::variant<ConfigAvoidance, VelocityBound, InputBound>;

/// Stacked constraint values and first-order expansions on the local
/// tangent space, rows ordered [configuration; velocity; input].
struct ConstraintEval {
  Eigen::VectorXd values;  // p
  Eigen::MatrixXd jac_x;   // p x 2n, blocks (psi, dxi)
  Eigen::MatrixXd jac_u;   // p x m
};

/// Lagrange multipliers and penalty weights, one row per constraint,
/// shared across every time step of an iteration.
struct MultiplierState {
  Eigen::VectorXd lambda;  // >= 0
  Eigen::VectorXd mu;      // > 0
  double gamma = 10.0;     // penalty growth factor, > 1
  double mu_max = 1e8;
};

enum class JacobianMode { Numeric, Analytic };

double eval_velocity_bound(const VelocityBound& spec, const Eigen::VectorXd& xi);

struct AvoidanceEval {
  double value = 0.0;
  Eigen::VectorXd offset;  // masked tangent offset to the center, length n
};

/// Evaluates one avoidance constraint. Throws BranchAmbiguityError at the
/// logarithm branch cut unless `clamp_log` is set.
AvoidanceEval eval_config_avoidance(const ConfigAvoidance& spec,
                                    const GroupElement& X, bool clamp_log = false);

Eigen::VectorXd eval_input_bound(const InputBound& spec, const Eigen::VectorXd& u);

/**
 * A fixed list of constraints bound to a dynamics model.
 *
 * Jacobians come in two flavours. Numeric (the default) runs central
 * differences through the on-manifold perturbation X -> X exp(eps e_i),
 * xi -> xi + eps e_i, u -> u + eps e_i and is consistent with the value
 * evaluation by construction. Analytic uses the closed-form rows
 *   configuration: [-2 (ad_xi offset)^T, 2 offset^T]
 *   velocity:      [0, s (G d)^T] in x and s (L^T d)^T in u,
 * with G, L the twist/input Jacobians of the dynamics, d the bound gap and
 * s the bound sign.
 */
class ConstraintStack {
 public:
  ConstraintStack() = default;
  ConstraintStack(std::vector<ConstraintSpec> specs, const DynamicsModel& model,
                  JacobianMode mode = JacobianMode::Numeric,
                  bool clamp_log = false);

  int rows() const { return rows_total_; }
  int state_rows() const { return rows_state_; }
  bool empty() const { return rows_total_ == 0; }
  const std::vector<ConstraintSpec>& specs() const { return specs_; }

  /// Constraint values at a running step (configuration, velocity and
  /// input rows).
  Eigen::VectorXd values(const GroupElement& X, const Eigen::VectorXd& xi,
                         const Eigen::VectorXd& u) const;

  /// Values of the state-dependent rows only, used at the terminal step.
  Eigen::VectorXd terminal_values(const GroupElement& X,
                                  const Eigen::VectorXd& xi) const;

  ConstraintEval eval(const GroupElement& X, const Eigen::VectorXd& xi,
                      const Eigen::VectorXd& u) const;
  ConstraintEval terminal_eval(const GroupElement& X,
                               const Eigen::VectorXd& xi) const;

 private:
  Eigen::MatrixXd numeric_jac_x(const GroupElement& X, const Eigen::VectorXd& xi,
                                const Eigen::VectorXd* u) const;
  Eigen::MatrixXd numeric_jac_u(const GroupElement& X, const Eigen::VectorXd& xi,
                                const Eigen::VectorXd& u) const;
  Eigen::MatrixXd analytic_jac_x(const GroupElement& X,
                                 const Eigen::VectorXd& xi) const;
  Eigen::MatrixXd analytic_jac_u(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd stacked(const GroupElement& X, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd* u) const;

  std::vector<ConstraintSpec> specs_;
  const DynamicsModel* model_ = nullptr;
  JacobianMode mode_ = JacobianMode::Numeric;
  bool clamp_log_ = false;
  int rows_total_ = 0;
  int rows_state_ = 0;
};

/// Diagonal of the active-set penalty matrix: entry i is 0 when g_i < 0 and
/// lambda_i = 0, and mu_i otherwise.
Eigen::VectorXd penalty_diagonal(const Eigen::VectorXd& values,
                                 const MultiplierState& mult);

/// Multiplier update after an inner solve. Per constraint the worst
/// (maximum) value over the supplied per-step evaluations is used:
///   lambda <- max(0, lambda + mu * g_worst),  mu <- min(gamma mu, mu_max).
/// Entries beyond a step's row count (terminal stacks are shorter) are
/// skipped in the aggregation.
MultiplierState update_multipliers(const MultiplierState& mult,
                                   std::span<const Eigen::VectorXd> step_values);

}  // namespace lieddp
