#include "lieddp/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>

namespace lieddp {

namespace {

constexpr double kTwistDivergenceBound = 1e6;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0, 1), never exactly 0 or 1.
double uniform01(std::uint64_t key) {
  return (static_cast<double>(key >> 11) + 0.5) * 0x1p-53;
}

std::uint64_t stream_key(std::uint64_t base_seed, std::uint64_t sample,
                         std::uint64_t step, std::uint64_t draw) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ (sample + 0x632BE59BD9B4E019ull));
  h = mix64(h ^ (step + 0xD6E8FEB86659FD93ull));
  h = mix64(h ^ (draw + 0xA5A5A5A5A5A5A5A5ull));
  return h;
}

Eigen::VectorXd error_state(const LieGroup& g, const Trajectory& nominal, int k,
                            const GroupElement& config, const Eigen::VectorXd& twist) {
  const int n = g.dim();
  Eigen::VectorXd err(2 * n);
  err.head(n) =
      g.log_map(compose(g.inverse(nominal.states[k].config), config));
  err.tail(n) = twist - nominal.states[k].twist;
  return err;
}

}  // namespace

namespace detail {

double gaussian_draw(std::uint64_t base_seed, std::uint64_t sample,
                     std::uint64_t step, std::uint64_t dim) {
  const double u1 = uniform01(stream_key(base_seed, sample, step, 2 * dim));
  const double u2 = uniform01(stream_key(base_seed, sample, step, 2 * dim + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

Eigen::VectorXd feedback_control(int k, const GroupElement& perturbed_config,
                                 const Eigen::VectorXd& perturbed_twist,
                                 const Trajectory& nominal, const Policy& policy,
                                 bool full_state_feedback) {
  if (k < 0 || k >= nominal.horizon()) {
    throw std::invalid_argument("feedback_control: step index out of range");
  }
  const LieGroup& g = *nominal.states[k].config.group;
  const int n = g.dim();
  Eigen::VectorXd err = Eigen::VectorXd::Zero(2 * n);
  err.head(n) = g.log_map(
      compose(g.inverse(nominal.states[k].config), perturbed_config));
  if (full_state_feedback) {
    err.tail(n) = perturbed_twist - nominal.states[k].twist;
  }
  return nominal.inputs[k] + policy.gains[k] * err;
}

Trajectory stochastic_rollout(const DynamicsModel& model, const Trajectory& nominal,
                              const Policy& policy, const NoiseModel& noise,
                              std::uint64_t sample_index,
                              const HarnessOptions& options) {
  const LieGroup& g = model.group();
  const int N = nominal.horizon();
  const int n = g.dim();
  const double dt = nominal.dt;

  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(N + 1);
  traj.inputs.reserve(N);
  traj.states.push_back(nominal.states[0]);

  for (int k = 0; k < N; ++k) {
    const State& cur = traj.states.back();
    Eigen::VectorXd u = nominal.inputs[k];
    if (options.mode == ControlMode::Feedback) {
      u = feedback_control(k, cur.config, cur.twist, nominal, policy,
                           options.full_state_feedback);
    }

    Eigen::VectorXd xi_next =
        cur.twist + model.twist_derivative(cur.twist, u) * dt;
    if (noise.sigma_w != 0.0) {
      for (int d = 0; d < n; ++d) {
        xi_next[d] += noise.sigma_w *
                      detail::gaussian_draw(noise.base_seed, sample_index,
                                            static_cast<std::uint64_t>(k),
                                            static_cast<std::uint64_t>(d));
      }
    }
    if (!xi_next.allFinite() ||
        xi_next.cwiseAbs().maxCoeff() > kTwistDivergenceBound) {
      throw DivergenceError("stochastic_rollout: twist diverged", k + 1);
    }

    const Eigen::VectorXd& advance =
        options.integrator == NoiseIntegrator::CurrentTwist ? cur.twist : xi_next;
    State next;
    next.config = compose(cur.config, g.exp_map(advance * dt));
    next.twist = std::move(xi_next);
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double MonteCarloStats::terminal_variance_trace() const {
  if (variance.empty()) return 0.0;
  return variance.back().sum();
}

MonteCarloStats monte_carlo(const DynamicsModel& model, const Trajectory& nominal,
                            const Policy& policy, const NoiseModel& noise,
                            int n_samples, const HarnessOptions& options) {
  if (n_samples < 2) {
    throw std::invalid_argument("monte_carlo: need at least 2 samples");
  }
  const LieGroup& g = model.group();
  const int N = nominal.horizon();
  const int dim = 2 * g.dim();

  MonteCarloStats stats;
  stats.mode = options.mode;
  stats.mean.assign(N + 1, Eigen::VectorXd::Zero(dim));
  std::vector<Eigen::VectorXd> m2(N + 1, Eigen::VectorXd::Zero(dim));

  // Samples are reduced strictly in index order (Welford), which keeps the
  // result independent of how the rollouts themselves are scheduled.
  for (int s = 0; s < n_samples; ++s) {
    std::vector<Eigen::VectorXd> errors;
    errors.reserve(N + 1);
    try {
      const Trajectory traj = stochastic_rollout(
          model, nominal, policy, noise, static_cast<std::uint64_t>(s), options);
      for (int k = 0; k <= N; ++k) {
        errors.push_back(error_state(g, nominal, k, traj.states[k].config,
                                     traj.states[k].twist));
      }
    } catch (const DivergenceError&) {
      ++stats.dropped;
      continue;
    } catch (const BranchAmbiguityError&) {
      ++stats.dropped;
      continue;
    }
    ++stats.sample_count;
    const double count = static_cast<double>(stats.sample_count);
    for (int k = 0; k <= N; ++k) {
      const Eigen::VectorXd delta = errors[k] - stats.mean[k];
      stats.mean[k] += delta / count;
      m2[k] += delta.cwiseProduct(errors[k] - stats.mean[k]);
    }
  }

  if (stats.sample_count == 0) {
    throw std::runtime_error("monte_carlo: every sample diverged");
  }
  stats.variance.assign(N + 1, Eigen::VectorXd::Zero(dim));
  if (stats.sample_count > 1) {
    for (int k = 0; k <= N; ++k) {
      stats.variance[k] = m2[k] / static_cast<double>(stats.sample_count - 1);
    }
  }
  return stats;
}

}  // namespace lieddp
