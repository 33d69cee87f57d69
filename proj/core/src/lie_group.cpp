#include "lieddp/lie_group.hpp"

#include <cmath>

namespace lieddp {

namespace {

constexpr double kTaylorSwitch = 1e-8;   // rotation angle below which series are used
constexpr double kBranchMargin = 1e-6;   // distance from pi where log_map refuses
constexpr double kSkewTol = 1e-8;

// sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3 with series fallbacks.
struct RotationCoeffs {
  double a, b, c;
};

RotationCoeffs rotation_coeffs(double theta) {
  RotationCoeffs k{};
  const double t2 = theta * theta;
  if (theta < kTaylorSwitch) {
    k.a = 1.0 - t2 / 6.0;
    k.b = 0.5 - t2 / 24.0;
    k.c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    k.a = std::sin(theta) / theta;
    k.b = (1.0 - std::cos(theta)) / t2;
    k.c = (theta - std::sin(theta)) / (t2 * theta);
  }
  return k;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const RotationCoeffs k = rotation_coeffs(theta);
  const Eigen::Matrix3d W = skew3(omega);
  return Eigen::Matrix3d::Identity() + k.a * W + k.b * W * W;
}

// Left Jacobian of SO(3): the translation mixer in the SE(3) exponential.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const RotationCoeffs k = rotation_coeffs(theta);
  const Eigen::Matrix3d W = skew3(omega);
  return Eigen::Matrix3d::Identity() + k.b * W + k.c * W * W;
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew3(omega);
  double d;  // coefficient of W^2
  if (theta < kTaylorSwitch) {
    d = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    d = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() - 0.5 * W + d * W * W;
}

// Axis of a rotation with angle at or near pi, recovered from the symmetric
// part R + I = 2 n n^T + O(pi - theta). Sign is not determined by R alone.
Eigen::Vector3d near_pi_axis(const Eigen::Matrix3d& R) {
  const Eigen::Matrix3d S = 0.5 * (R + Eigen::Matrix3d::Identity());
  int j = 0;
  S.diagonal().maxCoeff(&j);
  Eigen::Vector3d n = S.col(j) / std::sqrt(S(j, j));
  n.normalize();
  return n;
}

// Principal SO(3) logarithm. When `clamp` is set, angles within the branch
// margin of pi are resolved deterministically instead of throwing: the sign
// comes from the antisymmetric part if it is informative, otherwise the
// largest-magnitude axis component is made positive.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& R, bool clamp) {
  Eigen::Vector3d svec;
  svec << 0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)),
      0.5 * (R(1, 0) - R(0, 1));
  const double s = svec.norm();                                   // |sin(theta)|
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);  // cos(theta)
  const double theta = std::atan2(s, c);

  if (theta > M_PI - kBranchMargin) {
    if (!clamp) {
      throw BranchAmbiguityError(
          "log_map: rotation angle within 1e-6 of pi, principal branch "
          "ambiguous; perturb the input or use the clamped logarithm");
    }
    Eigen::Vector3d n = near_pi_axis(R);
    double sign = 0.0;
    if (s > 1e-12) {
      sign = (n.dot(svec) >= 0.0) ? 1.0 : -1.0;
    } else {
      // Exactly at the cut both branches are valid; fix the sign so the
      // largest-magnitude axis component comes out negative.
      int j = 0;
      n.cwiseAbs().maxCoeff(&j);
      sign = (n(j) >= 0.0) ? -1.0 : 1.0;
    }
    return theta * sign * n;
  }

  if (s < 1e-12) {
    // theta/sin(theta) -> 1; svec already equals sin(theta) * axis.
    return (1.0 + theta * theta / 6.0) * svec;
  }
  return (theta / s) * svec;
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Eigen::Matrix3d skew3(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// SO3
// ---------------------------------------------------------------------------

Eigen::MatrixXd SO3::hat(const Eigen::VectorXd& v) const {
  require(v.size() == 3, "SO3::hat: expected a 3-vector");
  return skew3(Eigen::Vector3d(v));
}

Eigen::VectorXd SO3::vee(const Eigen::MatrixXd& M) const {
  require(M.rows() == 3 && M.cols() == 3, "SO3::vee: expected a 3x3 matrix");
  require((M + M.transpose()).cwiseAbs().maxCoeff() <= kSkewTol,
          "SO3::vee: matrix is not skew-symmetric");
  Eigen::Vector3d v;
  v << M(2, 1), M(0, 2), M(1, 0);
  return v;
}

GroupElement SO3::exp_map(const Eigen::VectorXd& v) const {
  require(v.size() == 3, "SO3::exp_map: expected a 3-vector");
  return GroupElement{this, so3_exp(Eigen::Vector3d(v))};
}

Eigen::VectorXd SO3::log_map(const GroupElement& X) const {
  check_element(X.matrix);
  return so3_log(Eigen::Matrix3d(X.matrix), /*clamp=*/false);
}

Eigen::VectorXd SO3::log_clamped(const GroupElement& X) const {
  return so3_log(Eigen::Matrix3d(X.matrix), /*clamp=*/true);
}

Eigen::MatrixXd SO3::adjoint(const GroupElement& X) const { return X.matrix; }

Eigen::MatrixXd SO3::ad(const Eigen::VectorXd& xi) const {
  require(xi.size() == 3, "SO3::ad: expected a 3-vector");
  return skew3(Eigen::Vector3d(xi));
}

GroupElement SO3::identity_element() const {
  return GroupElement{this, Eigen::Matrix3d::Identity()};
}

GroupElement SO3::inverse(const GroupElement& X) const {
  return GroupElement{this, X.matrix.transpose()};
}

void SO3::check_element(const Eigen::MatrixXd& m) const {
  require(m.rows() == 3 && m.cols() == 3, "SO3: expected a 3x3 matrix");
  require((m.transpose() * m - Eigen::Matrix3d::Identity()).norm() <= 1e-9,
          "SO3: matrix is not orthonormal (R^T R != I)");
  require(std::abs(m.determinant() - 1.0) <= 1e-9,
          "SO3: determinant is not +1");
}

// ---------------------------------------------------------------------------
// SE3
// ---------------------------------------------------------------------------

Eigen::MatrixXd SE3::hat(const Eigen::VectorXd& v) const {
  require(v.size() == 6, "SE3::hat: expected a 6-vector [omega; v]");
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew3(v.head<3>());
  m.topRightCorner<3, 1>() = v.tail<3>();
  return m;
}

Eigen::VectorXd SE3::vee(const Eigen::MatrixXd& M) const {
  require(M.rows() == 4 && M.cols() == 4, "SE3::vee: expected a 4x4 matrix");
  const Eigen::Matrix3d W = M.topLeftCorner<3, 3>();
  require((W + W.transpose()).cwiseAbs().maxCoeff() <= kSkewTol,
          "SE3::vee: rotation block is not skew-symmetric");
  require(M.bottomRows<1>().cwiseAbs().maxCoeff() <= kSkewTol,
          "SE3::vee: bottom row is not zero");
  Eigen::VectorXd v(6);
  v << W(2, 1), W(0, 2), W(1, 0), M(0, 3), M(1, 3), M(2, 3);
  return v;
}

GroupElement SE3::exp_map(const Eigen::VectorXd& v) const {
  require(v.size() == 6, "SE3::exp_map: expected a 6-vector [omega; v]");
  const Eigen::Vector3d omega = v.head<3>();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = so3_exp(omega);
  m.topRightCorner<3, 1>() = so3_left_jacobian(omega) * v.tail<3>();
  return GroupElement{this, m};
}

Eigen::VectorXd SE3::log_map(const GroupElement& X) const {
  check_element(X.matrix);
  const Eigen::Vector3d omega =
      so3_log(X.matrix.topLeftCorner<3, 3>(), /*clamp=*/false);
  Eigen::VectorXd v(6);
  v.head<3>() = omega;
  v.tail<3>() = so3_left_jacobian_inverse(omega) * X.matrix.topRightCorner<3, 1>();
  return v;
}

Eigen::VectorXd SE3::log_clamped(const GroupElement& X) const {
  const Eigen::Vector3d omega =
      so3_log(X.matrix.topLeftCorner<3, 3>(), /*clamp=*/true);
  Eigen::VectorXd v(6);
  v.head<3>() = omega;
  v.tail<3>() = so3_left_jacobian_inverse(omega) * X.matrix.topRightCorner<3, 1>();
  return v;
}

Eigen::MatrixXd SE3::adjoint(const GroupElement& X) const {
  const Eigen::Matrix3d R = X.matrix.topLeftCorner<3, 3>();
  const Eigen::Vector3d p = X.matrix.topRightCorner<3, 1>();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A.topLeftCorner<3, 3>() = R;
  A.bottomLeftCorner<3, 3>() = skew3(p) * R;
  A.bottomRightCorner<3, 3>() = R;
  return A;
}

Eigen::MatrixXd SE3::ad(const Eigen::VectorXd& xi) const {
  require(xi.size() == 6, "SE3::ad: expected a 6-vector [omega; v]");
  const Eigen::Matrix3d W = skew3(xi.head<3>());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A.topLeftCorner<3, 3>() = W;
  A.bottomLeftCorner<3, 3>() = skew3(xi.tail<3>());
  A.bottomRightCorner<3, 3>() = W;
  return A;
}

GroupElement SE3::identity_element() const {
  return GroupElement{this, Eigen::Matrix4d::Identity()};
}

GroupElement SE3::inverse(const GroupElement& X) const {
  const Eigen::Matrix3d Rt = X.matrix.topLeftCorner<3, 3>().transpose();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = Rt;
  m.topRightCorner<3, 1>() = -Rt * X.matrix.topRightCorner<3, 1>();
  return GroupElement{this, m};
}

void SE3::check_element(const Eigen::MatrixXd& m) const {
  require(m.rows() == 4 && m.cols() == 4, "SE3: expected a 4x4 matrix");
  require(m(3, 0) == 0.0 && m(3, 1) == 0.0 && m(3, 2) == 0.0 && m(3, 3) == 1.0,
          "SE3: bottom row must be exactly [0 0 0 1]");
  so3().check_element(m.topLeftCorner<3, 3>());
}

// ---------------------------------------------------------------------------
// Free functions
// ---------------------------------------------------------------------------

const SO3& so3() {
  static const SO3 g;
  return g;
}

const SE3& se3() {
  static const SE3 g;
  return g;
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require(a.group != nullptr && a.group == b.group,
          "compose: elements belong to different groups");
  return GroupElement{a.group, a.matrix * b.matrix};
}

GroupElement inverse(const GroupElement& a) {
  require(a.group != nullptr, "inverse: element has no group");
  return a.group->inverse(a);
}

GroupElement identity(const LieGroup& group) { return group.identity_element(); }

GroupElement make_element(const LieGroup& group, const Eigen::MatrixXd& m) {
  group.check_element(m);
  return GroupElement{&group, m};
}

Eigen::Matrix3d rotation_axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  require(axis.norm() > 0.0, "rotation_axis_angle: zero axis");
  return so3_exp(axis.normalized() * angle_rad);
}

Eigen::Matrix3d rotation_xyz_deg(double phi_deg, double theta_deg, double psi_deg) {
  const double d2r = M_PI / 180.0;
  return rotation_axis_angle(Eigen::Vector3d::UnitX(), phi_deg * d2r) *
         rotation_axis_angle(Eigen::Vector3d::UnitY(), theta_deg * d2r) *
         rotation_axis_angle(Eigen::Vector3d::UnitZ(), psi_deg * d2r);
}

Eigen::Vector3d euler_xyz_deg(const Eigen::Matrix3d& R) {
  const EulerAngles e = euler_xyz_deg_forced(R);
  if (e.degenerate) {
    throw GimbalLockError(
        "euler_xyz_deg: |theta| within 1e-6 degrees of 90, angles degenerate");
  }
  return e.deg;
}

EulerAngles euler_xyz_deg_forced(const Eigen::Matrix3d& R) {
  // With R = R_x(phi) R_y(theta) R_z(psi):
  //   R(0,2) = sin(theta)
  //   R(0,0) = cos(theta) cos(psi),  R(0,1) = -cos(theta) sin(psi)
  //   R(2,2) = cos(phi) cos(theta),  R(1,2) = -sin(phi) cos(theta)
  const double r2d = 180.0 / M_PI;
  EulerAngles out;
  const double s = std::clamp(R(0, 2), -1.0, 1.0);
  const double theta = std::asin(s);
  out.degenerate = (90.0 - std::abs(theta) * r2d) < 1e-6;
  if (out.degenerate) {
    // Only phi + psi (or phi - psi) is observable; pin phi = 0.
    out.deg << 0.0, theta * r2d, std::atan2(R(1, 0), R(1, 1)) * r2d;
    return out;
  }
  out.deg << std::atan2(-R(1, 2), R(2, 2)) * r2d, theta * r2d,
      std::atan2(-R(0, 1), R(0, 0)) * r2d;
  return out;
}

}  // namespace lieddp
