#include <benchmark/benchmark.h>

#include "lieddp/solver.hpp"

using namespace lieddp;

namespace {

Problem benchmark_problem(int horizon, bool constrained) {
  Problem p;
  p.model = std::make_shared<SE3RigidBody>(
      RigidBodyParams(Eigen::Matrix3d::Identity(), 1.0));
  p.initial = State{identity(se3()), Eigen::VectorXd::Zero(6)};
  Eigen::Matrix4d goal_pose = Eigen::Matrix4d::Identity();
  goal_pose.topLeftCorner<3, 3>() = rotation_xyz_deg(0, 0, 90);
  goal_pose.topRightCorner<3, 1>() = Eigen::Vector3d(1, 1, 1);
  p.goal = State{GroupElement{&se3(), goal_pose}, Eigen::VectorXd::Zero(6)};
  p.weights.final_state = 100.0 * Eigen::MatrixXd::Identity(12, 12);
  p.weights.running_state = 5e-5 * Eigen::MatrixXd::Identity(12, 12);
  p.weights.running_input = 1e-3 * Eigen::MatrixXd::Identity(6, 6);
  p.horizon = horizon;
  p.dt = 3.0 / horizon;
  if (constrained) {
    ConfigAvoidance obstacle;
    Eigen::Matrix4d c = Eigen::Matrix4d::Identity();
    c.topRightCorner<3, 1>() = Eigen::Vector3d(0.5, 0.5, 0.5);
    obstacle.center = GroupElement{&se3(), c};
    obstacle.radius = 0.6;
    obstacle.components = AvoidanceComponents::Position;
    obstacle.metric = PositionMetric::Euclidean;
    p.constraints.push_back(obstacle);
  }
  return p;
}

}  // namespace

static void BM_RolloutN300(benchmark::State& state) {
  const Problem p = benchmark_problem(300, false);
  const std::vector<Eigen::VectorXd> inputs(300, Eigen::VectorXd::Zero(6));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(*p.model, p.initial, inputs, p.dt));
  }
}
BENCHMARK(BM_RolloutN300);

static void BM_ConstraintStackEval(benchmark::State& state) {
  const Problem p = benchmark_problem(30, true);
  const JacobianMode mode =
      state.range(0) == 0 ? JacobianMode::Numeric : JacobianMode::Analytic;
  const ConstraintStack stack(p.constraints, *p.model, mode);
  const GroupElement X = se3().exp_map(Eigen::VectorXd::Constant(6, 0.2));
  const Eigen::VectorXd xi = Eigen::VectorXd::Constant(6, 0.3);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(6, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stack.eval(X, xi, u));
  }
}
BENCHMARK(BM_ConstraintStackEval)->Arg(0)->Arg(1);

static void BM_BackwardPassN50(benchmark::State& state) {
  const Problem p = benchmark_problem(50, false);
  const std::vector<Eigen::VectorXd> zeros(p.horizon, Eigen::VectorXd::Zero(6));
  const Trajectory nominal = rollout(*p.model, p.initial, zeros, p.dt);
  std::vector<BackwardStep> steps(p.horizon);
  for (int k = 0; k < p.horizon; ++k) {
    const State& s = nominal.states[k];
    const PerturbedSystem disc = rollout_jacobians(
        se3(), s.twist, p.model->linearize_twist(s.twist), p.dt);
    steps[k].A = disc.A;
    steps[k].B = disc.B;
    steps[k].dx = goal_error_clamped(p.goal, s);
    steps[k].u = nominal.inputs[k];
  }
  BackwardTerminal terminal;
  terminal.dx = goal_error_clamped(p.goal, nominal.states[p.horizon]);
  const MultiplierState none;
  const SolverConfig cfg;
  for (auto _ : state) {
    double rho = 0.0;
    benchmark::DoNotOptimize(
        backward_pass(steps, terminal, p.weights, none, cfg, rho));
  }
}
BENCHMARK(BM_BackwardPassN50);

static void BM_SolveUnconstrainedN30(benchmark::State& state) {
  const Problem p = benchmark_problem(30, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p));
  }
}
BENCHMARK(BM_SolveUnconstrainedN30);

static void BM_SolveObstacleN30(benchmark::State& state) {
  const Problem p = benchmark_problem(30, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p));
  }
}
BENCHMARK(BM_SolveObstacleN30);
