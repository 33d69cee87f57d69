#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lieddp/lie_group.hpp"

namespace lieddp {

/// Mass and body-frame inertia of a rigid body. Validated on construction:
/// the inertia must be symmetric (1e-12) with positive eigenvalues and the
/// mass positive, so the generalized inertia blockdiag(I_b, m I3) is SPD.
class RigidBodyParams {
 public:
  RigidBodyParams(const Eigen::Matrix3d& inertia_body, double mass);

  const Eigen::Matrix3d& inertia_body() const { return inertia_body_; }
  double mass() const { return mass_; }

  /// 6x6 generalized inertia blockdiag(I_b, m I3), [omega; v] ordering.
  const Eigen::MatrixXd& generalized_inertia() const { return J_; }
  const Eigen::MatrixXd& generalized_inertia_inverse() const { return J_inv_; }

 private:
  Eigen::Matrix3d inertia_body_;
  double mass_;
  Eigen::MatrixXd J_;
  Eigen::MatrixXd J_inv_;
};

/// A point on the tangent bundle: configuration plus body twist.
struct State {
  GroupElement config;
  Eigen::VectorXd twist;
};

/// First-order expansion of the twist dynamics f(xi, u) about a nominal
/// twist. `drift` is the affine remainder f(xi) - twist_jacobian * xi; it is
/// exposed for diagnostics and is not part of the perturbation model, which
/// is linear around the nominal.
struct LinearizedTwist {
  Eigen::MatrixXd twist_jacobian;  // df/dxi, n x n
  Eigen::MatrixXd input_jacobian;  // df/du,  n x m
  Eigen::VectorXd drift;           // n
};

/// Error-state system x = [psi; dxi]. Continuous form:
///   A = [[-ad_xi, I], [0, df/dxi]],  B = [[0], [df/du]].
struct PerturbedSystem {
  Eigen::MatrixXd A;  // 2n x 2n
  Eigen::MatrixXd B;  // 2n x m
  double dt = 0.0;
  bool discretized = false;
};

struct Trajectory {
  std::vector<State> states;            // N + 1
  std::vector<Eigen::VectorXd> inputs;  // N
  double dt = 0.0;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// Velocity dynamics of a system whose configuration evolves on a matrix
/// Lie group as Xdot = X hat(xi). Implementations are pure and reentrant.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual const LieGroup& group() const = 0;
  virtual int input_dim() const = 0;

  /// xidot = f(xi, u).
  virtual Eigen::VectorXd twist_derivative(const Eigen::VectorXd& xi,
                                           const Eigen::VectorXd& u) const = 0;

  virtual LinearizedTwist linearize_twist(const Eigen::VectorXd& xi) const = 0;
};

/// Free rigid body on SE(3): J_b xidot = coad(xi) J_b xi + u + w, with
/// u = [torques; forces] in the body frame. There are no potential forces;
/// `constant_wrench` w (zero by default) is an optional fixed body wrench
/// for tasks that want one.
class SE3RigidBody final : public DynamicsModel {
 public:
  explicit SE3RigidBody(RigidBodyParams params,
                        Eigen::VectorXd constant_wrench = Eigen::VectorXd::Zero(6))
      : params_(std::move(params)), wrench_(std::move(constant_wrench)) {
    if (wrench_.size() != 6) {
      throw std::invalid_argument("SE3RigidBody: wrench must be a 6-vector");
    }
  }

  const LieGroup& group() const override { return se3(); }
  int input_dim() const override { return 6; }
  Eigen::VectorXd twist_derivative(const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& u) const override;
  LinearizedTwist linearize_twist(const Eigen::VectorXd& xi) const override;

  const RigidBodyParams& params() const { return params_; }
  const Eigen::VectorXd& constant_wrench() const { return wrench_; }

 private:
  RigidBodyParams params_;
  Eigen::VectorXd wrench_;
};

/// Attitude-only rigid body on SO(3): I_b wdot = -w x I_b w + u.
class SO3RigidBody final : public DynamicsModel {
 public:
  explicit SO3RigidBody(const Eigen::Matrix3d& inertia_body);

  const LieGroup& group() const override { return so3(); }
  int input_dim() const override { return 3; }
  Eigen::VectorXd twist_derivative(const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& u) const override;
  LinearizedTwist linearize_twist(const Eigen::VectorXd& xi) const override;

 private:
  Eigen::Matrix3d inertia_;
  Eigen::Matrix3d inertia_inv_;
};

enum class Discretization { Euler, ZeroOrderHold };

/// Continuous error-state matrices from the nominal twist and the twist
/// linearization.
PerturbedSystem perturbed_system(const LieGroup& group, const Eigen::VectorXd& xi,
                                 const LinearizedTwist& lin);

/// Euler: A_k = I + A dt, B_k = B dt. Zero-order hold: exact matrix
/// exponential of the augmented system. Throws std::invalid_argument for
/// dt <= 0 or an already-discretized input.
PerturbedSystem discretize(const PerturbedSystem& sys, double dt,
                           Discretization scheme = Discretization::Euler);

/// Discrete error-state transition consistent with the rollout integrator,
/// which updates the twist first and advances the configuration with the
/// new twist. With G = df/dxi and L = df/du:
///   A = [[I - ad_xi dt, (I + G dt) dt], [0, I + G dt]],
///   B = [[L dt^2], [L dt]].
/// On segments where the dynamics are linear this is the exact Jacobian of
/// one integration step; it differs from plain Euler at order dt^2.
PerturbedSystem rollout_jacobians(const LieGroup& group, const Eigen::VectorXd& xi,
                                  const LinearizedTwist& lin, double dt);

/// Integrates the dynamics forward on the manifold:
///   xi_{k+1} = xi_k + f(xi_k, u_k) dt,
///   X_{k+1}  = X_k exp((xi_{k+1} dt)^).
/// The configuration uses the freshly integrated twist. Throws
/// DivergenceError (with step index) if a state leaves |xi|_inf <= 1e6 or
/// becomes non-finite.
Trajectory rollout(const DynamicsModel& model, const State& x0,
                   const std::vector<Eigen::VectorXd>& inputs, double dt);

}  // namespace lieddp
