#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lieddp/csv_io.hpp"
#include "lieddp/monte_carlo.hpp"
#include "lieddp/scenario.hpp"

namespace fs = std::filesystem;
using namespace lieddp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;      // I/O or validation failure
constexpr int kExitMaxIters = 2;
constexpr int kExitDiverged = 3;

int status_exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return kExitOk;
    case SolveStatus::MaxIterations:
      return kExitMaxIters;
    case SolveStatus::Diverged:
    case SolveStatus::IllConditioned:
      return kExitDiverged;
  }
  return kExitDiverged;
}

void apply_jacobian_flag(Scenario& sc, const std::string& jacobian) {
  if (jacobian.empty()) return;
  if (jacobian == "numeric") {
    sc.solver.jacobian_mode = JacobianMode::Numeric;
  } else if (jacobian == "analytic") {
    sc.solver.jacobian_mode = JacobianMode::Analytic;
  } else {
    throw ScenarioError("--jacobian", "expected numeric or analytic");
  }
}

int run_solve(const std::string& scenario_path, const std::string& out_dir,
              const std::string& jacobian) {
  Scenario sc = load_scenario(scenario_path);
  apply_jacobian_flag(sc, jacobian);

  const SolveResult result = solve(sc.to_problem());

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_text_file((out / "trajectory.csv").string(),
                  trajectory_csv(result.trajectory));
  write_text_file((out / "convergence.csv").string(),
                  convergence_csv(result.records));
  write_text_file((out / "policy.csv").string(), policy_csv(result.policy));
  write_text_file((out / "summary.json").string(), summary_json(result));

  std::cout << "status: " << to_string(result.status)
            << "  cost: " << result.final_cost
            << "  iterations: " << result.inner_iterations
            << "  max violation: " << result.max_violation << "\n";
  return status_exit_code(result.status);
}

int run_monte_carlo(const std::string& scenario_path, const std::string& out_dir,
                    int samples, const std::string& mode, long long seed_flag) {
  Scenario sc = load_scenario(scenario_path);
  if (seed_flag >= 0) sc.noise.seed = static_cast<std::uint64_t>(seed_flag);

  const fs::path out(out_dir);
  const fs::path traj_path = out / "trajectory.csv";
  const fs::path policy_path = out / "policy.csv";
  if (!fs::exists(traj_path) || !fs::exists(policy_path)) {
    std::cerr << "error: no solve outputs in " << out_dir
              << " (run `solve` first)\n";
    return kExitError;
  }
  const Trajectory nominal = read_trajectory_csv(read_text_file(traj_path.string()));
  const Policy policy = read_policy_csv(read_text_file(policy_path.string()), 12, 6);
  if (policy.horizon() != nominal.horizon()) {
    std::cerr << "error: trajectory and policy horizons disagree\n";
    return kExitError;
  }

  HarnessOptions options;
  options.mode = mode == "fb" ? ControlMode::Feedback : ControlMode::OpenLoop;
  options.full_state_feedback = sc.noise.full_state_feedback;
  options.integrator = sc.noise.integrator;
  NoiseModel noise;
  noise.sigma_w = sc.noise.sigma_w;
  noise.base_seed = sc.noise.seed;

  const Problem problem = sc.to_problem();
  const MonteCarloStats stats =
      monte_carlo(*problem.model, nominal, policy, noise, samples, options);

  const std::string filename = mode == "fb" ? "mc_fb.csv" : "mc_open.csv";
  write_text_file((out / filename).string(), mc_stats_csv(stats));
  std::cout << "mode: " << mode << "  samples: " << stats.sample_count
            << "  dropped: " << stats.dropped << "  terminal variance trace: "
            << stats.terminal_variance_trace() << "\n";

  // When both modes have been produced, emit the comparison summary from
  // the published files.
  const fs::path open_path = out / "mc_open.csv";
  const fs::path fb_path = out / "mc_fb.csv";
  if (fs::exists(open_path) && fs::exists(fb_path)) {
    const MonteCarloStats open_stats =
        read_mc_stats_csv(read_text_file(open_path.string()));
    const MonteCarloStats fb_stats =
        read_mc_stats_csv(read_text_file(fb_path.string()));
    write_text_file((out / "mc_summary.json").string(),
                    mc_summary_json(open_stats, fb_stats));
  }
  return kExitOk;
}

int run_validate(const std::string& scenario_path) {
  const Scenario sc = load_scenario(scenario_path);
  std::cout << "valid: horizon " << sc.horizon << ", dt " << sc.dt << ", "
            << sc.constraints.size() << " constraint(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained trajectory optimization on matrix Lie groups"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, jacobian, mode = "open";
  int samples = 1000;
  long long seed_flag = -1;

  CLI::App* solve_cmd = app.add_subcommand("solve", "Optimize a scenario");
  solve_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  solve_cmd->add_option("-o,--out", out_dir, "Output directory")->required();
  solve_cmd->add_option("--jacobian", jacobian,
                        "Constraint jacobian mode: numeric|analytic");

  CLI::App* mc_cmd =
      app.add_subcommand("mc", "Monte-Carlo disturbance evaluation");
  mc_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  mc_cmd->add_option("-o,--out", out_dir,
                     "Directory holding the solve outputs")->required();
  mc_cmd->add_option("--samples", samples, "Number of samples")
      ->check(CLI::PositiveNumber);
  mc_cmd->add_option("--mode", mode, "Control mode: open|fb")
      ->check(CLI::IsMember({"open", "fb"}));
  mc_cmd->add_option("--seed", seed_flag, "Override the scenario noise seed");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve(scenario_path, out_dir, jacobian);
    if (mc_cmd->parsed()) {
      return run_monte_carlo(scenario_path, out_dir, samples, mode, seed_flag);
    }
    return run_validate(scenario_path);
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
