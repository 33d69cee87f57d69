#pragma once

#include <cstdint>
#include <vector>

#include "lieddp/solver.hpp"

namespace lieddp {

/// Additive twist noise: xi_{k+1} picks up sigma_w * w with w ~ N(0, I).
/// Draws come from a counter-based stream keyed on (base_seed, sample,
/// step, dim), so results never depend on execution order.
struct NoiseModel {
  double sigma_w = 0.0;
  std::uint64_t base_seed = 0;
};

enum class ControlMode { OpenLoop, Feedback };

/// How the perturbed configuration is advanced. NominalConsistent uses the
/// freshly integrated twist, matching the deterministic rollout exactly in
/// the noiseless limit. CurrentTwist advances with the pre-update twist.
enum class NoiseIntegrator { NominalConsistent, CurrentTwist };

struct HarnessOptions {
  ControlMode mode = ControlMode::OpenLoop;
  NoiseIntegrator integrator = NoiseIntegrator::NominalConsistent;
  /// When set (default) the measured twist error feeds the velocity block
  /// of the gain input; when clear only the configuration log-error is
  /// applied and the velocity block is zero.
  bool full_state_feedback = true;
};

/// Affine correction around the nominal:
///   u = u*_k + K_k [log((X*_k)^-1 Xe); full_state ? (xie - xi*_k) : 0].
/// The feedforward term is not re-added; it is already folded into u*_k.
/// Throws BranchAmbiguityError if the perturbed configuration is antipodal
/// to the nominal one.
Eigen::VectorXd feedback_control(int k, const GroupElement& perturbed_config,
                                 const Eigen::VectorXd& perturbed_twist,
                                 const Trajectory& nominal, const Policy& policy,
                                 bool full_state_feedback);

/// One sample of the stochastic dynamics, deterministic in
/// (noise.base_seed, sample_index). Throws DivergenceError or
/// BranchAmbiguityError for samples that must be dropped.
Trajectory stochastic_rollout(const DynamicsModel& model, const Trajectory& nominal,
                              const Policy& policy, const NoiseModel& noise,
                              std::uint64_t sample_index, const HarnessOptions& options);

/// Per-timestep, per-dimension moments of the error state
/// [log((X*_k)^-1 Xe_k); xie_k - xi*_k] over the retained samples.
struct MonteCarloStats {
  std::vector<Eigen::VectorXd> mean;      // N+1 entries, 2n each
  std::vector<Eigen::VectorXd> variance;  // N+1 entries, 2n each
  int sample_count = 0;
  int dropped = 0;
  ControlMode mode = ControlMode::OpenLoop;

  /// Trace of the (diagonal) terminal error-state covariance.
  double terminal_variance_trace() const;
};

/// Runs n_samples stochastic rollouts and reduces them in sample-index
/// order (Welford), so the statistics are independent of any execution
/// schedule. Dropped (diverged or antipodal) samples are excluded and
/// counted. Throws std::runtime_error if every sample was dropped.
MonteCarloStats monte_carlo(const DynamicsModel& model, const Trajectory& nominal,
                            const Policy& policy, const NoiseModel& noise,
                            int n_samples, const HarnessOptions& options);

namespace detail {
/// Standard normal draw from the counter-based stream; exposed for tests.
double gaussian_draw(std::uint64_t base_seed, std::uint64_t sample,
                     std::uint64_t step, std::uint64_t dim);
}  // namespace detail

}  // namespace lieddp
