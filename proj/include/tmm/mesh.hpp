#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tmm {

using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Triangle = std::array<std::uint32_t, 3>;

/// Vertex/triangle soup in the world frame (meters).
///
/// Every instance satisfies: all triangle indices < vertex count, all
/// coordinates finite. Winding is stored exactly as given.
class Mesh {
 public:
  Mesh() = default;

  std::span<const Point3> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  /// Replaces one vertex in place. Throws IndexOutOfRange or
  /// NonFiniteCoordinate and leaves the mesh untouched on failure.
  void set_vertex(std::size_t i, const Point3& p);

  friend bool operator==(const Mesh& a, const Mesh& b);

 private:
  friend Mesh make_mesh(std::vector<Point3> vertices, std::vector<Triangle> triangles);

  std::vector<Point3> vertices_;
  std::vector<Triangle> triangles_;
};

/// Validating constructor; the only way to obtain a non-empty Mesh.
Mesh make_mesh(std::vector<Point3> vertices, std::vector<Triangle> triangles);

bool is_finite(const Point3& p);

/// Bitwise equality of coordinates (distinguishes -0.0 from 0.0, NaN never
/// appears in a valid mesh).
bool bitwise_equal(const Point3& a, const Point3& b);

}  // namespace tmm
