#include "tmm/mesh.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "tmm/error.hpp"

namespace tmm {

bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

bool bitwise_equal(const Point3& a, const Point3& b) {
  return std::memcmp(a.data(), b.data(), 3 * sizeof(double)) == 0;
}

Mesh make_mesh(std::vector<Point3> vertices, std::vector<Triangle> triangles) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!is_finite(vertices[i])) {
      throw Error(ErrorCode::NonFiniteCoordinate,
                  "vertex " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  const auto n = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (auto idx : triangles[t]) {
      if (idx >= n) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(idx) + " but mesh has " + std::to_string(n));
      }
    }
  }
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  return m;
}

void Mesh::set_vertex(std::size_t i, const Point3& p) {
  if (i >= vertices_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "vertex index " + std::to_string(i));
  }
  if (!is_finite(p)) {
    throw Error(ErrorCode::NonFiniteCoordinate, "non-finite vertex");
  }
  vertices_[i] = p;
}

bool operator==(const Mesh& a, const Mesh& b) {
  if (a.vertices_.size() != b.vertices_.size() || a.triangles_ != b.triangles_) {
    return false;
  }
  for (std::size_t i = 0; i < a.vertices_.size(); ++i) {
    if (!bitwise_equal(a.vertices_[i], b.vertices_[i])) return false;
  }
  return true;
}

}  // namespace tmm
