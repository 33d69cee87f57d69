#pragma once

#include <Eigen/Dense>

#include "lieddp/errors.hpp"

namespace lieddp {

class LieGroup;

/// A configuration: a square matrix together with the group it belongs to.
/// Instances are cheap to copy and freely shareable across threads.
struct GroupElement {
  const LieGroup* group = nullptr;
  Eigen::MatrixXd matrix;
};

/**
 * Generic matrix Lie group.
 *
 * The interface is the genericity contract: an n-dimensional group exposes
 * the isomorphisms between R^n and its algebra (hat/vee), the exponential
 * and principal logarithm, and the adjoint machinery (Ad, ad, coad). SO3
 * and SE3 are the two shipped implementations; anything written against
 * this interface works for both.
 *
 * Twist ordering for SE3 is [omega; v] (angular first). The ad/coad block
 * layouts and the rigid-body inertia depend on this ordering.
 *
 * All operations are pure and reentrant.
 */
class LieGroup {
 public:
  virtual ~LieGroup() = default;

  virtual const char* name() const = 0;

  /// Dimension n of the Lie algebra (3 for SO3, 6 for SE3).
  virtual int dim() const = 0;

  /// Size of the square matrix representation (3 for SO3, 4 for SE3).
  virtual int matrix_size() const = 0;

  /// R^n -> algebra. Throws std::invalid_argument on dimension mismatch.
  virtual Eigen::MatrixXd hat(const Eigen::VectorXd& v) const = 0;

  /// algebra -> R^n. Throws std::invalid_argument if the matrix is not in
  /// the algebra (skew violation above 1e-8).
  virtual Eigen::VectorXd vee(const Eigen::MatrixXd& M) const = 0;

  /// Closed-form exponential map. Total on finite inputs; switches to a
  /// Taylor series for rotation angles below 1e-8.
  virtual GroupElement exp_map(const Eigen::VectorXd& v) const = 0;

  /// Principal logarithm. Throws BranchAmbiguityError when the rotation
  /// angle is within 1e-6 of pi, std::invalid_argument if X violates the
  /// group invariants.
  virtual Eigen::VectorXd log_map(const GroupElement& X) const = 0;

  /// Principal logarithm with a deterministic branch choice at the cut:
  /// never throws for valid group elements. At angles within 1e-6 of pi
  /// the axis is recovered from the symmetric part and its sign is fixed
  /// by convention (largest-magnitude component positive).
  virtual Eigen::VectorXd log_clamped(const GroupElement& X) const = 0;

  /// n x n matrix of the adjoint action: hat(Ad_X v) = X hat(v) X^-1.
  virtual Eigen::MatrixXd adjoint(const GroupElement& X) const = 0;

  /// n x n matrix of the algebra adjoint: hat(ad_xi eta) = [hat(xi), hat(eta)].
  virtual Eigen::MatrixXd ad(const Eigen::VectorXd& xi) const = 0;

  /// Coadjoint map, the transpose of ad.
  Eigen::MatrixXd coad(const Eigen::VectorXd& xi) const {
    return ad(xi).transpose();
  }

  virtual GroupElement identity_element() const = 0;

  /// Analytic inverse (transpose for SO3, [R^T, -R^T p] for SE3).
  virtual GroupElement inverse(const GroupElement& X) const = 0;

  /// Throws std::invalid_argument if m violates the group invariants.
  virtual void check_element(const Eigen::MatrixXd& m) const = 0;
};

/// Rotation group SO(3): 3x3 orthonormal matrices with determinant one.
class SO3 final : public LieGroup {
 public:
  const char* name() const override { return "SO3"; }
  int dim() const override { return 3; }
  int matrix_size() const override { return 3; }
  Eigen::MatrixXd hat(const Eigen::VectorXd& v) const override;
  Eigen::VectorXd vee(const Eigen::MatrixXd& M) const override;
  GroupElement exp_map(const Eigen::VectorXd& v) const override;
  Eigen::VectorXd log_map(const GroupElement& X) const override;
  Eigen::VectorXd log_clamped(const GroupElement& X) const override;
  Eigen::MatrixXd adjoint(const GroupElement& X) const override;
  Eigen::MatrixXd ad(const Eigen::VectorXd& xi) const override;
  GroupElement identity_element() const override;
  GroupElement inverse(const GroupElement& X) const override;
  void check_element(const Eigen::MatrixXd& m) const override;
};

/// Special Euclidean group SE(3) in homogeneous 4x4 form [[R, p], [0, 1]].
/// Twists are [omega; v] with the algebra layout [[hat(omega), v], [0, 0]].
class SE3 final : public LieGroup {
 public:
  const char* name() const override { return "SE3"; }
  int dim() const override { return 6; }
  int matrix_size() const override { return 4; }
  Eigen::MatrixXd hat(const Eigen::VectorXd& v) const override;
  Eigen::VectorXd vee(const Eigen::MatrixXd& M) const override;
  GroupElement exp_map(const Eigen::VectorXd& v) const override;
  Eigen::VectorXd log_map(const GroupElement& X) const override;
  Eigen::VectorXd log_clamped(const GroupElement& X) const override;
  Eigen::MatrixXd adjoint(const GroupElement& X) const override;
  Eigen::MatrixXd ad(const Eigen::VectorXd& xi) const override;
  GroupElement identity_element() const override;
  GroupElement inverse(const GroupElement& X) const override;
  void check_element(const Eigen::MatrixXd& m) const override;
};

/// Shared immutable instances.
const SO3& so3();
const SE3& se3();

/// Group arithmetic. Throws std::invalid_argument on group mismatch.
GroupElement compose(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);
GroupElement identity(const LieGroup& group);

/// Validated constructor: checks the group invariants before wrapping.
GroupElement make_element(const LieGroup& group, const Eigen::MatrixXd& m);

/// 3x3 skew matrix of a 3-vector.
Eigen::Matrix3d skew3(const Eigen::Vector3d& v);

/// Rodrigues rotation about a unit axis.
Eigen::Matrix3d rotation_axis_angle(const Eigen::Vector3d& axis, double angle_rad);

/// R = R_x(phi) R_y(theta) R_z(psi), angles in degrees.
Eigen::Matrix3d rotation_xyz_deg(double phi_deg, double theta_deg, double psi_deg);

/// Euler angles (phi, theta, psi) in degrees such that
/// R = R_x(phi) R_y(theta) R_z(psi). Throws GimbalLockError when |theta|
/// is within 1e-6 degrees of 90.
Eigen::Vector3d euler_xyz_deg(const Eigen::Matrix3d& R);

struct EulerAngles {
  Eigen::Vector3d deg;
  bool degenerate = false;
};

/// Euler extraction that never throws: at gimbal lock phi is set to zero
/// and the remaining freedom is folded into psi; `degenerate` is flagged.
EulerAngles euler_xyz_deg_forced(const Eigen::Matrix3d& R);

}  // namespace lieddp
