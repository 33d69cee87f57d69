#pragma once

#include <span>
#include <string>

#include "lieddp/monte_carlo.hpp"
#include "lieddp/scenario.hpp"
#include "lieddp/solver.hpp"

namespace lieddp {

/// Trajectory table with header
///   k,t,px,py,pz,phi_deg,theta_deg,psi_deg,wx,wy,wz,vx,vy,vz,u1..u6,gimbal_lock
/// Values are printed with 17 significant digits (exact double roundtrip),
/// '.' decimal separator and LF line endings. The terminal row has zero
/// input columns. Rows inside the gimbal margin are flagged in the sentinel
/// column and their angles use the pinned phi = 0 convention.
std::string trajectory_csv(const Trajectory& traj);

/// Inverse of trajectory_csv (SE3 only): rebuilds configurations from the
/// Euler columns. Throws std::runtime_error on malformed input.
Trajectory read_trajectory_csv(const std::string& text);

/// Gain table: k, the 6x12 gain row-major, then the 6 feedforward entries.
std::string policy_csv(const Policy& policy);
Policy read_policy_csv(const std::string& text, int state_dim, int input_dim);

/// One row per accepted iteration: iter,outer,cost,alpha,rho,max_violation.
std::string convergence_csv(std::span<const IterationRecord> records);

/// {"final_cost", "iterations", "max_violation", "status"}.
std::string summary_json(const SolveResult& result);

/// Long-format moments: k,dim,mean,variance.
std::string mc_stats_csv(const MonteCarloStats& stats);
MonteCarloStats read_mc_stats_csv(const std::string& text);

/// Terminal-covariance comparison of the two control modes.
std::string mc_summary_json(const MonteCarloStats& open_loop,
                            const MonteCarloStats& feedback);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lieddp
