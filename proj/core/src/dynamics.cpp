#include "lieddp/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace lieddp {

namespace {

constexpr double kTwistDivergenceBound = 1e6;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// [[ (I_b w)^, m v^ ], [ m v^, 0 ]]: the part of d(coad(xi) J xi)/dxi that
// comes from differentiating coad(xi) itself.
Eigen::MatrixXd momentum_coupling(const RigidBodyParams& p,
                                  const Eigen::VectorXd& xi) {
  const Eigen::Vector3d w = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  M.topLeftCorner<3, 3>() = skew3(p.inertia_body() * w);
  M.topRightCorner<3, 3>() = p.mass() * skew3(v);
  M.bottomLeftCorner<3, 3>() = p.mass() * skew3(v);
  return M;
}

}  // namespace

RigidBodyParams::RigidBodyParams(const Eigen::Matrix3d& inertia_body, double mass)
    : inertia_body_(inertia_body), mass_(mass) {
  require((inertia_body - inertia_body.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "RigidBodyParams: inertia must be symmetric");
  require(mass > 0.0, "RigidBodyParams: mass must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(inertia_body);
  require(eig.eigenvalues().minCoeff() > 0.0,
          "RigidBodyParams: inertia must be positive definite");
  J_ = Eigen::MatrixXd::Zero(6, 6);
  J_.topLeftCorner<3, 3>() = inertia_body;
  J_.bottomRightCorner<3, 3>() = mass * Eigen::Matrix3d::Identity();
  J_inv_ = Eigen::MatrixXd::Zero(6, 6);
  J_inv_.topLeftCorner<3, 3>() = inertia_body.inverse();
  J_inv_.bottomRightCorner<3, 3>() = (1.0 / mass) * Eigen::Matrix3d::Identity();
}

Eigen::VectorXd SE3RigidBody::twist_derivative(const Eigen::VectorXd& xi,
                                               const Eigen::VectorXd& u) const {
  require(xi.size() == 6 && u.size() == 6,
          "SE3RigidBody::twist_derivative: expected 6-vectors");
  const Eigen::MatrixXd& J = params_.generalized_inertia();
  return params_.generalized_inertia_inverse() *
         (se3().coad(xi) * (J * xi) + u + wrench_);
}

LinearizedTwist SE3RigidBody::linearize_twist(const Eigen::VectorXd& xi) const {
  require(xi.size() == 6, "SE3RigidBody::linearize_twist: expected a 6-vector");
  const Eigen::MatrixXd& J = params_.generalized_inertia();
  const Eigen::MatrixXd& J_inv = params_.generalized_inertia_inverse();
  const Eigen::MatrixXd coupling = momentum_coupling(params_, xi);
  LinearizedTwist lin;
  lin.twist_jacobian = J_inv * (se3().coad(xi) * J + coupling);
  lin.input_jacobian = J_inv;
  lin.drift = J_inv * (wrench_ - coupling * xi);
  return lin;
}

SO3RigidBody::SO3RigidBody(const Eigen::Matrix3d& inertia_body)
    : inertia_(RigidBodyParams(inertia_body, 1.0).inertia_body()) {
  inertia_inv_ = inertia_.inverse();
}

Eigen::VectorXd SO3RigidBody::twist_derivative(const Eigen::VectorXd& xi,
                                               const Eigen::VectorXd& u) const {
  require(xi.size() == 3 && u.size() == 3,
          "SO3RigidBody::twist_derivative: expected 3-vectors");
  const Eigen::Vector3d w = xi;
  return inertia_inv_ * (-w.cross(inertia_ * w) + u);
}

LinearizedTwist SO3RigidBody::linearize_twist(const Eigen::VectorXd& xi) const {
  require(xi.size() == 3, "SO3RigidBody::linearize_twist: expected a 3-vector");
  const Eigen::Vector3d w = xi;
  LinearizedTwist lin;
  lin.twist_jacobian =
      inertia_inv_ * (skew3(inertia_ * w) - skew3(w) * inertia_);
  lin.input_jacobian = inertia_inv_;
  lin.drift = twist_derivative(xi, Eigen::Vector3d::Zero()) -
              lin.twist_jacobian * xi;
  return lin;
}

PerturbedSystem perturbed_system(const LieGroup& group, const Eigen::VectorXd& xi,
                                 const LinearizedTwist& lin) {
  const int n = group.dim();
  const int m = static_cast<int>(lin.input_jacobian.cols());
  require(xi.size() == n, "perturbed_system: twist dimension mismatch");
  require(lin.twist_jacobian.rows() == n && lin.twist_jacobian.cols() == n,
          "perturbed_system: twist_jacobian must be n x n");
  PerturbedSystem sys;
  sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.A.topLeftCorner(n, n) = -group.ad(xi);
  sys.A.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  sys.A.bottomRightCorner(n, n) = lin.twist_jacobian;
  sys.B = Eigen::MatrixXd::Zero(2 * n, m);
  sys.B.bottomRows(n) = lin.input_jacobian;
  return sys;
}

PerturbedSystem discretize(const PerturbedSystem& sys, double dt,
                           Discretization scheme) {
  require(dt > 0.0, "discretize: dt must be positive");
  require(!sys.discretized, "discretize: system is already discrete");
  const auto nx = sys.A.rows();
  const auto nu = sys.B.cols();
  PerturbedSystem out;
  out.dt = dt;
  out.discretized = true;
  if (scheme == Discretization::Euler) {
    out.A = Eigen::MatrixXd::Identity(nx, nx) + sys.A * dt;
    out.B = sys.B * dt;
    return out;
  }
  // Zero-order hold via the augmented matrix exponential
  //   exp([[A, B], [0, 0]] dt) = [[A_k, B_k], [0, I]].
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  aug.topLeftCorner(nx, nx) = sys.A * dt;
  aug.topRightCorner(nx, nu) = sys.B * dt;
  const Eigen::MatrixXd expm = aug.exp();
  out.A = expm.topLeftCorner(nx, nx);
  out.B = expm.topRightCorner(nx, nu);
  return out;
}

PerturbedSystem rollout_jacobians(const LieGroup& group, const Eigen::VectorXd& xi,
                                  const LinearizedTwist& lin, double dt) {
  require(dt > 0.0, "rollout_jacobians: dt must be positive");
  const int n = group.dim();
  const auto m = lin.input_jacobian.cols();
  const Eigen::MatrixXd twist_step =
      Eigen::MatrixXd::Identity(n, n) + lin.twist_jacobian * dt;
  PerturbedSystem sys;
  sys.dt = dt;
  sys.discretized = true;
  sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.A.topLeftCorner(n, n) =
      Eigen::MatrixXd::Identity(n, n) - group.ad(xi) * dt;
  sys.A.topRightCorner(n, n) = twist_step * dt;
  sys.A.bottomRightCorner(n, n) = twist_step;
  sys.B = Eigen::MatrixXd::Zero(2 * n, m);
  sys.B.topRows(n) = lin.input_jacobian * (dt * dt);
  sys.B.bottomRows(n) = lin.input_jacobian * dt;
  return sys;
}

Trajectory rollout(const DynamicsModel& model, const State& x0,
                   const std::vector<Eigen::VectorXd>& inputs, double dt) {
  require(dt > 0.0, "rollout: dt must be positive");
  require(!inputs.empty(), "rollout: horizon must be at least 1");
  const int N = static_cast<int>(inputs.size());
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(N + 1);
  traj.inputs = inputs;
  traj.states.push_back(x0);
  for (int k = 0; k < N; ++k) {
    const State& s = traj.states.back();
    const Eigen::VectorXd xi_next =
        s.twist + model.twist_derivative(s.twist, inputs[k]) * dt;
    if (!xi_next.allFinite() ||
        xi_next.cwiseAbs().maxCoeff() > kTwistDivergenceBound) {
      throw DivergenceError("rollout: twist diverged", k + 1);
    }
    State next;
    next.twist = xi_next;
    next.config = compose(s.config, model.group().exp_map(xi_next * dt));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

}  // namespace lieddp
