#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "tmm/mesh.hpp"
#include "tmm/snapshot.hpp"
#include "tmm/timestamp.hpp"

namespace tmm {

inline constexpr std::string_view kLiveLayerId = "LIVE";

// Intersection constants.
inline constexpr double kDeterminantEpsilon = 1e-12;
inline constexpr double kMinHitDistance = 1e-9;
inline constexpr double kTieEpsilon = 1e-12;

struct Ray {
  Point3 origin;
  Vector3 direction;  // unit length within 1e-9

  /// Throws InvalidArgument unless |direction| = 1 within 1e-9.
  static Ray make(const Point3& origin, const Vector3& direction);
  /// Normalizes `direction`; throws InvalidArgument for a zero vector.
  static Ray toward(const Point3& origin, const Vector3& direction);

  Point3 at(double t) const { return origin + t * direction; }
};

struct Hit {
  Point3 point;
  double ray_distance = 0.0;
  std::string layer_id;
  Timestamp timestamp;
  std::size_t layer_ordinal = 0;
  std::uint32_t mesh_index = 0;
  std::uint32_t triangle_index = 0;
};

/// One world-space triangle as stored by the index.
struct IndexedTriangle {
  Point3 a, b, c;
  std::uint32_t mesh_index = 0;
  std::uint32_t triangle_index = 0;
};

/// Distance along the ray to the triangle, or nullopt. Backfaces count;
/// zero-area triangles and hits at distance ≤ kMinHitDistance never do.
std::optional<double> intersect_triangle(const Ray& ray, const Point3& a, const Point3& b,
                                         const Point3& c);

/// Bounding-volume hierarchy over every triangle of one layer, in world
/// coordinates (the anchor pose is applied at build time). Immutable.
class LayerIndex {
 public:
  LayerIndex() = default;

  const std::string& layer_id() const { return layer_id_; }
  Timestamp timestamp() const { return timestamp_; }
  bool is_live() const { return layer_id_ == kLiveLayerId; }

  std::span<const IndexedTriangle> triangles() const { return triangles_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Nearest hit within this layer. The returned Hit has layer_ordinal 0.
  std::optional<Hit> intersect(const Ray& ray) const;

  /// Same contract as intersect(), by scanning every triangle.
  std::optional<Hit> intersect_brute_force(const Ray& ray) const;

 private:
  friend LayerIndex build_layer(std::string id, Timestamp ts, std::span<const Mesh> meshes,
                                const RigidTransform& to_world);

  struct Node {
    Eigen::AlignedBox3d bounds;
    std::uint32_t first = 0;  // leaf: first triangle; inner: right child
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build_recursive(std::uint32_t begin, std::uint32_t end,
                                std::vector<Point3>& centroids);
  Hit make_hit(const Ray& ray, double t, const IndexedTriangle& tri) const;

  std::string layer_id_;
  Timestamp timestamp_;
  std::vector<IndexedTriangle> triangles_;
  std::vector<Node> nodes_;
};

LayerIndex build_layer(std::string id, Timestamp ts, std::span<const Mesh> meshes,
                       const RigidTransform& to_world);

/// Index for a saved snapshot; vertices are placed at its anchor pose.
LayerIndex build_index(const Snapshot& s);

/// Index for the live mesh set (layer id LIVE), stamped with the scan time.
LayerIndex build_live_index(std::span<const Mesh> live, Timestamp scanned_at);

/// True when `a` should win over `b`: strictly nearer, or tied within
/// kTieEpsilon and lower (layer ordinal, mesh index, triangle index).
bool hit_precedes(const Hit& a, const Hit& b);

/// Nearest hit over all layers; a layer's ordinal is its position in the list.
std::optional<Hit> ray_cast(std::span<const LayerIndex* const> layers, const Ray& ray);
std::optional<Hit> ray_cast(std::span<const std::shared_ptr<const LayerIndex>> layers,
                            const Ray& ray);

}  // namespace tmm
