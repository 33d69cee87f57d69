#pragma once

// Independent reference computations used to freeze expected test values.
// Nothing here may call into the code paths under test: the matrix
// exponential is Eigen's dense scaling-and-squaring routine, the Riccati
// recursion is written directly from the textbook equations, and RK4 is a
// plain fixed-step integrator.

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracles {

inline Eigen::MatrixXd dense_expm(const Eigen::MatrixXd& M) {
  return M.exp();
}

/// Finite-horizon discrete LQR gains for x' = A x + B u with running cost
/// 0.5 x^T Q x + 0.5 u^T R u and terminal 0.5 x^T Qf x. Returns the gains
/// of the minimizing law u_k = -K_k x_k, last stage first removed --
/// index k matches the time step.
inline std::vector<Eigen::MatrixXd> riccati_gains(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
    const Eigen::MatrixXd& R, const Eigen::MatrixXd& Qf, int horizon) {
  std::vector<Eigen::MatrixXd> gains(horizon);
  Eigen::MatrixXd P = Qf;
  for (int k = horizon - 1; k >= 0; --k) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd K = (R + BtP * B).ldlt().solve(BtP * A);
    P = Q + A.transpose() * P * A - A.transpose() * P * B * K;
    P = 0.5 * (P + P.transpose());
    gains[k] = K;
  }
  return gains;
}

/// Optimal LQR trajectory from x0 under the gains above.
inline std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>>
riccati_rollout(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                const std::vector<Eigen::MatrixXd>& gains,
                const Eigen::VectorXd& x0) {
  std::vector<Eigen::VectorXd> xs{x0};
  std::vector<Eigen::VectorXd> us;
  for (const Eigen::MatrixXd& K : gains) {
    us.push_back(-K * xs.back());
    xs.push_back(A * xs.back() + B * us.back());
  }
  return {xs, us};
}

using OdeRhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline Eigen::VectorXd rk4_step(const OdeRhs& f, const Eigen::VectorXd& x,
                                double dt) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Rotation vector with uniformly random direction and |omega| uniform in
/// (lo, hi).
inline Eigen::Vector3d random_rotvec(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mag(lo, hi);
  Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
  while (dir.norm() < 1e-12) dir = {normal(rng), normal(rng), normal(rng)};
  return dir.normalized() * mag(rng);
}

inline Eigen::VectorXd random_twist(std::mt19937_64& rng, double omega_lo,
                                    double omega_hi, double v_scale) {
  std::uniform_real_distribution<double> lin(-v_scale, v_scale);
  Eigen::VectorXd xi(6);
  xi.head<3>() = random_rotvec(rng, omega_lo, omega_hi);
  xi.tail<3>() = Eigen::Vector3d(lin(rng), lin(rng), lin(rng));
  return xi;
}

}  // namespace oracles
