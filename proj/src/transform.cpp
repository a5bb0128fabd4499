#include "tmm/transform.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "tmm/error.hpp"

namespace tmm {

RigidTransform RigidTransform::translation(const Vector3& t) {
  return rigid_from_parts_unchecked(Matrix3::Identity(), t);
}

RigidTransform RigidTransform::from_yaw(double radians, const Vector3& t) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  Matrix3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return rigid_from_parts_unchecked(r, t);
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool operator==(const RigidTransform& a, const RigidTransform& b) {
  return std::memcmp(a.rotation_.data(), b.rotation_.data(), 9 * sizeof(double)) == 0 &&
         bitwise_equal(a.translation_, b.translation_);
}

bool is_rotation(const Matrix3& r, double tol) {
  if (!r.allFinite()) return false;
  const Matrix3 gram = r.transpose() * r;
  if ((gram - Matrix3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform rigid_from_parts(const Matrix3& r, const Vector3& t) {
  if (!is_rotation(r)) {
    throw Error(ErrorCode::NotARotation, "matrix is not a proper rotation");
  }
  if (!is_finite(t)) {
    throw Error(ErrorCode::NonFiniteCoordinate, "translation is not finite");
  }
  return rigid_from_parts_unchecked(r, t);
}

RigidTransform rigid_from_parts_unchecked(const Matrix3& r, const Vector3& t) {
  RigidTransform out;
  out.rotation_ = r;
  out.translation_ = t;
  return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return rigid_from_parts_unchecked(a.rotation() * b.rotation(),
                                    a.rotation() * b.translation() + a.translation());
}

RigidTransform invert(const RigidTransform& a) {
  const Matrix3 rt = a.rotation().transpose();
  return rigid_from_parts_unchecked(rt, -(rt * a.translation()));
}

Mesh apply(const RigidTransform& motion, const Mesh& mesh) {
  std::vector<Point3> verts;
  verts.reserve(mesh.vertex_count());
  for (const auto& v : mesh.vertices()) verts.push_back(motion.apply(v));
  return make_mesh(std::move(verts),
                   std::vector<Triangle>(mesh.triangles().begin(), mesh.triangles().end()));
}

RigidTransform estimate_rigid(std::span<const std::pair<Point3, Point3>> pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "rigid estimation needs at least 3 correspondences");
  }
  const double n = static_cast<double>(pairs.size());
  Vector3 src_mean = Vector3::Zero();
  Vector3 dst_mean = Vector3::Zero();
  for (const auto& [p, q] : pairs) {
    src_mean += p;
    dst_mean += q;
  }
  src_mean /= n;
  dst_mean /= n;

  Matrix3 src_cov = Matrix3::Zero();
  Matrix3 cross = Matrix3::Zero();
  for (const auto& [p, q] : pairs) {
    const Vector3 dp = p - src_mean;
    src_cov += dp * dp.transpose();
    cross += dp * (q - dst_mean).transpose();
  }

  // Sources spanning fewer than two directions leave rotation about their
  // line unobservable.
  const Eigen::SelfAdjointEigenSolver<Matrix3> eig(src_cov, Eigen::EigenvaluesOnly);
  const Vector3 lambda = eig.eigenvalues();  // ascending
  if (!(lambda(2) > 0.0) || lambda(1) <= 1e-12 * lambda(2)) {
    throw Error(ErrorCode::DegenerateConfiguration, "source points are collinear");
  }

  const Eigen::JacobiSVD<Matrix3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 correction = Matrix3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) correction(2, 2) = -1.0;
  const Matrix3 r = v * correction * u.transpose();
  return rigid_from_parts_unchecked(r, dst_mean - r * src_mean);
}

double rotation_angle_between(const Matrix3& a, const Matrix3& b) {
  const Matrix3 rel = a.transpose() * b;
  const Vector3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double sin_theta = 0.5 * axis.norm();
  const double cos_theta = 0.5 * (rel.trace() - 1.0);
  return std::atan2(sin_theta, cos_theta);
}

ViewState manipulate_view(const ViewState& v, double delta_scale,
                          const RigidTransform& delta_rigid) {
  if (!(delta_scale > 0.0) || !std::isfinite(delta_scale)) {
    throw Error(ErrorCode::NonPositiveScale, "view scale factor must be positive");
  }
  ViewState out;
  out.scale = v.scale * delta_scale;
  if (!(out.scale > 0.0) || !std::isfinite(out.scale)) {
    throw Error(ErrorCode::NonPositiveScale, "view scale collapsed to zero");
  }
  out.view_rigid = compose(delta_rigid, v.view_rigid);
  return out;
}

std::vector<Point3> trail_in_view(const ViewState& v, std::span<const Point3> world_points) {
  std::vector<Point3> out;
  out.reserve(world_points.size());
  for (const auto& p : world_points) out.push_back(v.to_display(p));
  return out;
}

}  // namespace tmm
