#include "lieddp/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace lieddp {

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<double> split_fields(const std::string& line) {
  std::vector<double> fields;
  const char* p = line.c_str();
  char* end = nullptr;
  while (*p) {
    const double v = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("csv: malformed numeric field");
    fields.push_back(v);
    p = end;
    if (*p == ',') ++p;
  }
  return fields;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out =
      "k,t,px,py,pz,phi_deg,theta_deg,psi_deg,wx,wy,wz,vx,vy,vz,"
      "u1,u2,u3,u4,u5,u6,gimbal_lock\n";
  const int N = traj.horizon();
  for (int k = 0; k <= N; ++k) {
    const State& s = traj.states[k];
    const EulerAngles angles =
        euler_xyz_deg_forced(s.config.matrix.topLeftCorner<3, 3>());
    out += std::to_string(k);
    out += ',';
    append_number(out, k * traj.dt);
    for (int i = 0; i < 3; ++i) {
      out += ',';
      append_number(out, s.config.matrix(i, 3));
    }
    for (int i = 0; i < 3; ++i) {
      out += ',';
      append_number(out, angles.deg[i]);
    }
    for (int i = 0; i < 6; ++i) {
      out += ',';
      append_number(out, s.twist[i]);
    }
    for (int i = 0; i < 6; ++i) {
      out += ',';
      append_number(out, k < N ? traj.inputs[k][i] : 0.0);
    }
    out += ',';
    out += angles.degenerate ? '1' : '0';
    out += '\n';
  }
  return out;
}

Trajectory read_trajectory_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 3) throw std::runtime_error("trajectory csv: too few rows");
  Trajectory traj;
  const int N = static_cast<int>(lines.size()) - 2;  // header + N+1 rows
  traj.states.reserve(N + 1);
  traj.inputs.reserve(N);
  for (int k = 0; k <= N; ++k) {
    const std::vector<double> f = split_fields(lines[k + 1]);
    if (f.size() != 21) throw std::runtime_error("trajectory csv: bad row width");
    if (k == 1) traj.dt = f[1];
    State s;
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_xyz_deg(f[5], f[6], f[7]);
    m.topRightCorner<3, 1>() = Eigen::Vector3d(f[2], f[3], f[4]);
    s.config = GroupElement{&se3(), m};
    s.twist = Eigen::VectorXd(6);
    for (int i = 0; i < 6; ++i) s.twist[i] = f[8 + i];
    traj.states.push_back(std::move(s));
    if (k < N) {
      Eigen::VectorXd u(6);
      for (int i = 0; i < 6; ++i) u[i] = f[14 + i];
      traj.inputs.push_back(std::move(u));
    }
  }
  return traj;
}

std::string policy_csv(const Policy& policy) {
  const int N = policy.horizon();
  std::string out = "k";
  if (N > 0) {
    const auto rows = policy.gains[0].rows();
    const auto cols = policy.gains[0].cols();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        out += ",K_" + std::to_string(r) + "_" + std::to_string(c);
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) out += ",d_" + std::to_string(r);
  }
  out += '\n';
  for (int k = 0; k < N; ++k) {
    out += std::to_string(k);
    const Eigen::MatrixXd& K = policy.gains[k];
    for (Eigen::Index r = 0; r < K.rows(); ++r) {
      for (Eigen::Index c = 0; c < K.cols(); ++c) {
        out += ',';
        append_number(out, K(r, c));
      }
    }
    const Eigen::VectorXd& d = policy.feedforwards[k];
    for (Eigen::Index r = 0; r < d.size(); ++r) {
      out += ',';
      append_number(out, d[r]);
    }
    out += '\n';
  }
  return out;
}

Policy read_policy_csv(const std::string& text, int state_dim, int input_dim) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2) throw std::runtime_error("policy csv: too few rows");
  Policy policy;
  const std::size_t expected = 1 + input_dim * state_dim + input_dim;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<double> f = split_fields(lines[i]);
    if (f.size() != expected) throw std::runtime_error("policy csv: bad row width");
    Eigen::MatrixXd K(input_dim, state_dim);
    std::size_t pos = 1;
    for (int r = 0; r < input_dim; ++r) {
      for (int c = 0; c < state_dim; ++c) K(r, c) = f[pos++];
    }
    Eigen::VectorXd d(input_dim);
    for (int r = 0; r < input_dim; ++r) d[r] = f[pos++];
    policy.gains.push_back(std::move(K));
    policy.feedforwards.push_back(std::move(d));
  }
  return policy;
}

std::string convergence_csv(std::span<const IterationRecord> records) {
  std::string out = "iter,outer,cost,alpha,rho,max_violation\n";
  for (const IterationRecord& r : records) {
    out += std::to_string(r.iter);
    out += ',';
    out += std::to_string(r.outer);
    out += ',';
    append_number(out, r.cost);
    out += ',';
    append_number(out, r.alpha);
    out += ',';
    append_number(out, r.rho);
    out += ',';
    append_number(out, r.max_violation);
    out += '\n';
  }
  return out;
}

std::string summary_json(const SolveResult& result) {
  nlohmann::json doc;
  doc["final_cost"] = result.final_cost;
  doc["objective_cost"] = result.objective_cost;
  doc["iterations"] = result.inner_iterations;
  doc["outer_iterations"] = result.outer_iterations;
  doc["max_violation"] = result.max_violation;
  doc["status"] = to_string(result.status);
  return doc.dump(2) + "\n";
}

std::string mc_stats_csv(const MonteCarloStats& stats) {
  std::string out = "k,dim,mean,variance\n";
  for (std::size_t k = 0; k < stats.mean.size(); ++k) {
    for (Eigen::Index d = 0; d < stats.mean[k].size(); ++d) {
      out += std::to_string(k);
      out += ',';
      out += std::to_string(d);
      out += ',';
      append_number(out, stats.mean[k][d]);
      out += ',';
      append_number(out, stats.variance[k][d]);
      out += '\n';
    }
  }
  return out;
}

MonteCarloStats read_mc_stats_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2) throw std::runtime_error("mc csv: too few rows");
  MonteCarloStats stats;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<double> f = split_fields(lines[i]);
    if (f.size() != 4) throw std::runtime_error("mc csv: bad row width");
    const int k = static_cast<int>(f[0]);
    const int dim = static_cast<int>(f[1]);
    if (k >= static_cast<int>(stats.mean.size())) {
      stats.mean.resize(k + 1);
      stats.variance.resize(k + 1);
    }
    if (dim >= stats.mean[k].size()) {
      stats.mean[k].conservativeResize(dim + 1);
      stats.variance[k].conservativeResize(dim + 1);
    }
    stats.mean[k][dim] = f[2];
    stats.variance[k][dim] = f[3];
  }
  return stats;
}

std::string mc_summary_json(const MonteCarloStats& open_loop,
                            const MonteCarloStats& feedback) {
  nlohmann::json doc;
  const double open_trace = open_loop.terminal_variance_trace();
  const double fb_trace = feedback.terminal_variance_trace();
  doc["open_loop_terminal_variance_trace"] = open_trace;
  doc["feedback_terminal_variance_trace"] = fb_trace;
  doc["variance_ratio"] = open_trace > 0.0 ? fb_trace / open_trace : 0.0;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lieddp
