#pragma once

#include <stdexcept>
#include <string>

#include "lieddp/monte_carlo.hpp"
#include "lieddp/solver.hpp"

namespace lieddp {

/// Validation failure carrying the path of the offending field, e.g.
/// "constraints[0].radius".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct NoiseSettings {
  double sigma_w = 0.0;
  std::uint64_t seed = 0;
  bool full_state_feedback = true;
  NoiseIntegrator integrator = NoiseIntegrator::NominalConsistent;
};

/// A fully validated task description loaded from JSON. Unknown fields are
/// rejected; absent optional blocks fall back to defaults.
struct Scenario {
  const LieGroup* group = nullptr;
  int horizon = 0;
  double dt = 0.0;
  Eigen::Vector3d inertia_diag = Eigen::Vector3d::Ones();
  double mass = 1.0;
  Eigen::VectorXd constant_wrench = Eigen::VectorXd::Zero(6);
  State start;
  State goal;
  CostWeights weights;
  std::vector<ConstraintSpec> constraints;
  SolverConfig solver;
  NoiseSettings noise;

  Problem to_problem() const;
};

/// Parses and validates a scenario document. Throws ScenarioError naming
/// the offending field, or with field "json" for syntax errors.
Scenario parse_scenario(const std::string& json_text);

/// Loads a scenario file. Throws ScenarioError (field "file") when the
/// path cannot be read.
Scenario load_scenario(const std::string& path);

}  // namespace lieddp
