#include "lieddp/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lieddp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ScenarioError(field, message);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      fail(path + "." + item.key(), "unknown field");
    }
  }
}

const json& get_required(const json& obj, const std::string& path,
                         const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required field");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path, int size) {
  if (!v.is_array() || static_cast<int>(v.size()) != size) {
    fail(path, "expected an array of " + std::to_string(size) + " numbers");
  }
  Eigen::VectorXd out(size);
  for (int i = 0; i < size; ++i) {
    out[i] = as_number(v.at(i), path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Eigen::Matrix3d parse_rotation(const json& v, const std::string& path) {
  check_keys(v, path, {"euler_xyz_deg", "axis_angle_deg"});
  const bool has_euler = v.contains("euler_xyz_deg");
  const bool has_axis = v.contains("axis_angle_deg");
  if (has_euler == has_axis) {
    fail(path, "expected exactly one of euler_xyz_deg or axis_angle_deg");
  }
  if (has_euler) {
    const Eigen::VectorXd e = as_vector(v.at("euler_xyz_deg"),
                                        path + ".euler_xyz_deg", 3);
    return rotation_xyz_deg(e[0], e[1], e[2]);
  }
  const json& aa = v.at("axis_angle_deg");
  check_keys(aa, path + ".axis_angle_deg", {"axis", "angle_deg"});
  const Eigen::VectorXd axis = as_vector(
      get_required(aa, path + ".axis_angle_deg", "axis"),
      path + ".axis_angle_deg.axis", 3);
  if (axis.norm() == 0.0) fail(path + ".axis_angle_deg.axis", "axis must be nonzero");
  const double angle = as_number(
      get_required(aa, path + ".axis_angle_deg", "angle_deg"),
      path + ".axis_angle_deg.angle_deg");
  return rotation_axis_angle(Eigen::Vector3d(axis), angle * M_PI / 180.0);
}

State parse_state(const json& v, const std::string& path) {
  check_keys(v, path, {"position", "rotation", "twist"});
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  if (v.contains("position")) {
    position = as_vector(v.at("position"), path + ".position", 3);
  }
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  if (v.contains("rotation")) {
    R = parse_rotation(v.at("rotation"), path + ".rotation");
  }
  State s;
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = R;
  m.topRightCorner<3, 1>() = position;
  s.config = GroupElement{&se3(), m};
  s.twist = Eigen::VectorXd::Zero(6);
  if (v.contains("twist")) {
    s.twist = as_vector(v.at("twist"), path + ".twist", 6);
  }
  return s;
}

Eigen::MatrixXd parse_weight(const json& v, const std::string& path, int dim) {
  if (v.is_number()) {
    return v.get<double>() * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (v.is_array() && !v.empty() && v.at(0).is_number()) {
    const Eigen::VectorXd diag = as_vector(v, path, dim);
    return diag.asDiagonal();
  }
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != dim) {
      fail(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                     " matrix");
    }
    Eigen::MatrixXd M(dim, dim);
    for (int i = 0; i < dim; ++i) {
      M.row(i) = as_vector(v.at(i), path + "[" + std::to_string(i) + "]", dim)
                     .transpose();
    }
    return M;
  }
  fail(path, "expected a scalar, a diagonal array or a full matrix");
}

ConstraintSpec parse_constraint(const json& v, const std::string& path) {
  const std::string type = as_string(get_required(v, path, "type"), path + ".type");
  if (type == "obstacle") {
    check_keys(v, path, {"type", "center", "radius", "metric"});
    ConfigAvoidance c;
    const Eigen::VectorXd center =
        as_vector(get_required(v, path, "center"), path + ".center", 3);
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topRightCorner<3, 1>() = center;
    c.center = GroupElement{&se3(), m};
    c.radius = as_number(get_required(v, path, "radius"), path + ".radius");
    if (c.radius <= 0.0) fail(path + ".radius", "radius must be positive");
    c.components = AvoidanceComponents::Position;
    c.metric = PositionMetric::Euclidean;
    if (v.contains("metric")) {
      const std::string metric = as_string(v.at("metric"), path + ".metric");
      if (metric == "euclidean") {
        c.metric = PositionMetric::Euclidean;
      } else if (metric == "tangent_log") {
        c.metric = PositionMetric::TangentLog;
      } else {
        fail(path + ".metric", "expected euclidean or tangent_log");
      }
    }
    return c;
  }
  if (type == "unsafe_rotation") {
    check_keys(v, path, {"type", "rotation", "radius", "components"});
    ConfigAvoidance c;
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() =
        parse_rotation(get_required(v, path, "rotation"), path + ".rotation");
    c.center = GroupElement{&se3(), m};
    c.radius = as_number(get_required(v, path, "radius"), path + ".radius");
    if (c.radius <= 0.0) fail(path + ".radius", "radius must be positive");
    c.components = AvoidanceComponents::Rotation;
    if (v.contains("components")) {
      const std::string comp = as_string(v.at("components"), path + ".components");
      if (comp == "rotation") {
        c.components = AvoidanceComponents::Rotation;
      } else if (comp == "full") {
        c.components = AvoidanceComponents::Full;
      } else {
        fail(path + ".components", "expected rotation or full");
      }
    }
    return c;
  }
  if (type == "velocity_bound") {
    check_keys(v, path, {"type", "axis", "side", "value"});
    VelocityBound b;
    b.axis = as_int(get_required(v, path, "axis"), path + ".axis");
    if (b.axis < 0 || b.axis > 5) fail(path + ".axis", "axis must be in [0, 5]");
    const std::string side = as_string(get_required(v, path, "side"), path + ".side");
    if (side == "upper") {
      b.side = BoundSide::Upper;
    } else if (side == "lower") {
      b.side = BoundSide::Lower;
    } else {
      fail(path + ".side", "expected upper or lower");
    }
    b.value = as_number(get_required(v, path, "value"), path + ".value");
    return b;
  }
  if (type == "input_bound") {
    check_keys(v, path, {"type", "lower", "upper"});
    InputBound b;
    b.lower = as_vector(get_required(v, path, "lower"), path + ".lower", 6);
    b.upper = as_vector(get_required(v, path, "upper"), path + ".upper", 6);
    if (!(b.lower.array() <= b.upper.array()).all()) {
      fail(path + ".lower", "lower bound exceeds upper bound");
    }
    return b;
  }
  fail(path + ".type",
       "unknown constraint type (expected obstacle, unsafe_rotation, "
       "velocity_bound or input_bound)");
}

void parse_solver(const json& v, const std::string& path, SolverConfig& cfg) {
  check_keys(v, path,
             {"tol", "rho0", "rho_init", "rho_factor", "rho_max", "alpha_factor",
              "alpha_min", "max_inner_iters", "max_outer_iters", "constraint_tol",
              "lambda0", "mu0", "gamma", "mu_max", "feedforward_tol",
              "jacobian_mode", "discretization"});
  auto num = [&](const char* key, double& out, bool positive) {
    if (v.contains(key)) {
      out = as_number(v.at(key), path + "." + key);
      if (positive && out <= 0.0) fail(path + "." + key, "must be positive");
    }
  };
  num("tol", cfg.tol, true);
  if (v.contains("rho0")) {
    cfg.rho0 = as_number(v.at("rho0"), path + ".rho0");
    if (cfg.rho0 < 0.0) fail(path + ".rho0", "must be nonnegative");
  }
  num("rho_init", cfg.rho_init, true);
  num("rho_factor", cfg.rho_factor, true);
  if (cfg.rho_factor <= 1.0) fail(path + ".rho_factor", "must exceed 1");
  num("rho_max", cfg.rho_max, true);
  num("alpha_factor", cfg.alpha_factor, true);
  if (cfg.alpha_factor >= 1.0) fail(path + ".alpha_factor", "must be below 1");
  num("alpha_min", cfg.alpha_min, true);
  if (v.contains("max_inner_iters")) {
    cfg.max_inner_iters = as_int(v.at("max_inner_iters"), path + ".max_inner_iters");
    if (cfg.max_inner_iters < 1) fail(path + ".max_inner_iters", "must be at least 1");
  }
  if (v.contains("max_outer_iters")) {
    cfg.max_outer_iters = as_int(v.at("max_outer_iters"), path + ".max_outer_iters");
    if (cfg.max_outer_iters < 1) fail(path + ".max_outer_iters", "must be at least 1");
  }
  num("constraint_tol", cfg.constraint_tol, true);
  if (v.contains("lambda0")) {
    cfg.lambda0 = as_number(v.at("lambda0"), path + ".lambda0");
    if (cfg.lambda0 < 0.0) fail(path + ".lambda0", "must be nonnegative");
  }
  num("mu0", cfg.mu0, true);
  num("gamma", cfg.gamma, true);
  if (cfg.gamma <= 1.0) fail(path + ".gamma", "must exceed 1");
  num("mu_max", cfg.mu_max, true);
  num("feedforward_tol", cfg.feedforward_tol, true);
  if (v.contains("jacobian_mode")) {
    const std::string mode = as_string(v.at("jacobian_mode"), path + ".jacobian_mode");
    if (mode == "numeric") {
      cfg.jacobian_mode = JacobianMode::Numeric;
    } else if (mode == "analytic") {
      cfg.jacobian_mode = JacobianMode::Analytic;
    } else {
      fail(path + ".jacobian_mode", "expected numeric or analytic");
    }
  }
  if (v.contains("discretization")) {
    const std::string mode =
        as_string(v.at("discretization"), path + ".discretization");
    if (mode == "euler") {
      cfg.discretization = Discretization::Euler;
    } else if (mode == "zoh") {
      cfg.discretization = Discretization::ZeroOrderHold;
    } else {
      fail(path + ".discretization", "expected euler or zoh");
    }
  }
}

void parse_noise(const json& v, const std::string& path, NoiseSettings& noise) {
  check_keys(v, path, {"sigma_w", "seed", "full_state_feedback", "integrator"});
  if (v.contains("sigma_w")) {
    noise.sigma_w = as_number(v.at("sigma_w"), path + ".sigma_w");
    if (noise.sigma_w < 0.0) fail(path + ".sigma_w", "must be nonnegative");
  }
  if (v.contains("seed")) {
    const json& s = v.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) {
      fail(path + ".seed", "expected a nonnegative integer");
    }
    noise.seed = s.get<std::uint64_t>();
  }
  if (v.contains("full_state_feedback")) {
    noise.full_state_feedback =
        as_bool(v.at("full_state_feedback"), path + ".full_state_feedback");
  }
  if (v.contains("integrator")) {
    const std::string mode = as_string(v.at("integrator"), path + ".integrator");
    if (mode == "nominal") {
      noise.integrator = NoiseIntegrator::NominalConsistent;
    } else if (mode == "current_twist") {
      noise.integrator = NoiseIntegrator::CurrentTwist;
    } else {
      fail(path + ".integrator", "expected nominal or current_twist");
    }
  }
}

}  // namespace

Problem Scenario::to_problem() const {
  Problem p;
  p.model = std::make_shared<SE3RigidBody>(
      RigidBodyParams(inertia_diag.asDiagonal(), mass), constant_wrench);
  p.initial = start;
  p.goal = goal;
  p.weights = weights;
  p.constraints = constraints;
  p.config = solver;
  p.horizon = horizon;
  p.dt = dt;
  return p;
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("json", e.what());
  }
  check_keys(doc, "scenario",
             {"group", "horizon", "dt", "body", "start", "goal", "weights",
              "constraints", "solver", "noise"});

  Scenario sc;
  const std::string group =
      as_string(get_required(doc, "scenario", "group"), "group");
  if (group != "SE3") {
    fail("group", "unsupported group (only SE3 has shipped dynamics)");
  }
  sc.group = &se3();

  sc.horizon = as_int(get_required(doc, "scenario", "horizon"), "horizon");
  if (sc.horizon < 1) fail("horizon", "must be at least 1");
  sc.dt = as_number(get_required(doc, "scenario", "dt"), "dt");
  if (sc.dt <= 0.0) fail("dt", "must be positive");

  if (doc.contains("body")) {
    const json& body = doc.at("body");
    check_keys(body, "body", {"mass", "inertia_diag", "constant_wrench"});
    if (body.contains("mass")) {
      sc.mass = as_number(body.at("mass"), "body.mass");
      if (sc.mass <= 0.0) fail("body.mass", "must be positive");
    }
    if (body.contains("inertia_diag")) {
      const Eigen::VectorXd d =
          as_vector(body.at("inertia_diag"), "body.inertia_diag", 3);
      if ((d.array() <= 0.0).any()) {
        fail("body.inertia_diag", "entries must be positive");
      }
      sc.inertia_diag = d;
    }
    if (body.contains("constant_wrench")) {
      sc.constant_wrench =
          as_vector(body.at("constant_wrench"), "body.constant_wrench", 6);
    }
  }

  sc.start = parse_state(get_required(doc, "scenario", "start"), "start");
  sc.goal = parse_state(get_required(doc, "scenario", "goal"), "goal");

  const json& weights = get_required(doc, "scenario", "weights");
  check_keys(weights, "weights", {"final_state", "running_state", "running_input"});
  sc.weights.final_state = parse_weight(
      get_required(weights, "weights", "final_state"), "weights.final_state", 12);
  sc.weights.running_state =
      parse_weight(get_required(weights, "weights", "running_state"),
                   "weights.running_state", 12);
  sc.weights.running_input =
      parse_weight(get_required(weights, "weights", "running_input"),
                   "weights.running_input", 6);
  try {
    validate_weights(sc.weights, 12, 6);
  } catch (const std::invalid_argument& e) {
    fail("weights", e.what());
  }

  if (doc.contains("constraints")) {
    const json& list = doc.at("constraints");
    if (!list.is_array()) fail("constraints", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      sc.constraints.push_back(parse_constraint(
          list.at(i), "constraints[" + std::to_string(i) + "]"));
    }
  }

  if (doc.contains("solver")) parse_solver(doc.at("solver"), "solver", sc.solver);
  if (doc.contains("noise")) parse_noise(doc.at("noise"), "noise", sc.noise);

  try {
    GroupElement checked_start = make_element(se3(), sc.start.config.matrix);
    GroupElement checked_goal = make_element(se3(), sc.goal.config.matrix);
    (void)checked_start;
    (void)checked_goal;
  } catch (const std::invalid_argument& e) {
    fail("start.rotation", e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("file", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace lieddp
