#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tmm/mesh.hpp"

namespace tmm {

using Matrix3 = Eigen::Matrix3d;

/// Rigid motion p' = R p + T. R is orthonormal with det +1 (checked at 1e-9
/// by rigid_from_parts; the default is identity).
class RigidTransform {
 public:
  RigidTransform() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vector3& t);
  /// Rotation about +z by `radians`, then translation.
  static RigidTransform from_yaw(double radians, const Vector3& t = Vector3::Zero());

  const Matrix3& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }

  /// 4x4 homogeneous form [R T; 0 1].
  Eigen::Matrix4d homogeneous() const;

  friend bool operator==(const RigidTransform& a, const RigidTransform& b);

 private:
  friend RigidTransform rigid_from_parts(const Matrix3& r, const Vector3& t);
  friend RigidTransform rigid_from_parts_unchecked(const Matrix3& r, const Vector3& t);

  Matrix3 rotation_;
  Vector3 translation_;
};

/// Throws NotARotation unless RᵀR = I and det R = +1 within 1e-9.
RigidTransform rigid_from_parts(const Matrix3& r, const Vector3& t);

/// For deserialized data whose orthonormality was validated by the caller's
/// own tolerance, or for bit-exact reconstruction.
RigidTransform rigid_from_parts_unchecked(const Matrix3& r, const Vector3& t);

bool is_rotation(const Matrix3& r, double tol = 1e-9);

/// a ∘ b: applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& a);

Mesh apply(const RigidTransform& motion, const Mesh& mesh);

/// Least-squares rigid motion taking each pair's first point onto its second
/// (orthogonal Procrustes with reflection correction).
///
/// Throws DegenerateConfiguration for fewer than 3 pairs or collinear
/// sources.
RigidTransform estimate_rigid(std::span<const std::pair<Point3, Point3>> pairs);

/// Angle of the relative rotation a⁻¹b, radians.
double rotation_angle_between(const Matrix3& a, const Matrix3& b);

/// Display-only similarity transform: display = scale · view_rigid(world).
struct ViewState {
  double scale = 1.0;
  RigidTransform view_rigid;

  Point3 to_display(const Point3& world) const { return scale * view_rigid.apply(world); }
};

/// Multiplies the scale by delta_scale and pre-composes delta_rigid.
/// Throws NonPositiveScale if delta_scale ≤ 0 or the result is not > 0.
ViewState manipulate_view(const ViewState& v, double delta_scale,
                          const RigidTransform& delta_rigid);

/// Movement trail through world points, expressed in the display frame.
std::vector<Point3> trail_in_view(const ViewState& v, std::span<const Point3> world_points);

}  // namespace tmm
