#pragma once

#include <cstdint>
#include <array>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/mesh.hpp"
#include "tmm/spatial_index.hpp"
#include "tmm/transform.hpp"

namespace tmm::sim {

/// Axis-aligned room [0,width] × [0,depth] × [0,height], z up.
struct RoomSize {
  double width = 4.0;
  double depth = 3.0;
  double height = 2.5;
};

/// Box object. Local frame: x ∈ ±size.x/2, y ∈ ±size.y/2, z ∈ [0, size.z];
/// the local origin (bottom center) is the reference point for displacement.
struct SceneObject {
  std::string id;
  Vector3 size = Vector3::Constant(0.4);
  RigidTransform pose;

  Point3 reference_point() const { return pose.translation(); }
};

struct SceneSpec {
  RoomSize room;
  std::vector<SceneObject> objects;
};

struct MoveRecord {
  std::string object;
  RigidTransform motion;
  double displacement = 0.0;  // of the reference point, meters
};

/// Exact scene geometry plus the history of moves (the ground truth).
class Scene {
 public:
  const SceneSpec& spec() const { return spec_; }
  const SceneObject& object(std::string_view id) const;
  std::span<const MoveRecord> moves() const { return moves_; }

  /// Reference-point distance between the initial and the current pose.
  double net_displacement(std::string_view id) const;

 private:
  friend Scene generate_scene(SceneSpec spec);
  friend Scene move_object(Scene scene, std::string_view id, const RigidTransform& motion);

  SceneObject& object_mut(std::string_view id);

  SceneSpec spec_;
  std::vector<SceneObject> initial_;
  std::vector<MoveRecord> moves_;
};

/// Throws ObjectOutsideRoom or InvalidArgument (non-positive sizes, duplicate ids).
Scene generate_scene(SceneSpec spec);

/// Composes the world-frame motion onto the object's pose. Throws
/// UnknownObject or ObjectOutsideRoom.
Scene move_object(Scene scene, std::string_view id, const RigidTransform& motion);

/// World-frame motion rotating the object by `yaw` about its own vertical
/// axis through the reference point, then translating by `t`.
RigidTransform object_motion(const SceneObject& object, const Vector3& t, double yaw_radians);

struct ScanConfig {
  double edge_length = 0.05;
  double noise_sigma = 0.01;
  std::uint64_t seed = 1;
};

/// Triangulates the room (floor, walls, ceiling) and every object's visible
/// faces at the target edge length; each vertex is displaced along its face
/// normal by N(0, noise_sigma). Deterministic for a given seed.
/// Result: mesh 0 is the room, then one mesh per object.
std::vector<Mesh> sample_scan(const Scene& scene, const ScanConfig& config);

/// A named point on an object surface with its outward normal.
struct Feature {
  Point3 point;
  Vector3 normal;
  Vector3 tangent_u;
  Vector3 tangent_v;
};

inline constexpr double kFeatureInset = 0.05;
inline constexpr double kProbeStandoff = 0.3;

/// Features: "top-center", "top-front-left", "top-front-right",
/// "top-back-left", "top-back-right" (front = local −y, left = local −x,
/// corners inset by kFeatureInset), "front-center", "back-center",
/// "left-center", "right-center". Throws InvalidArgument.
Feature feature(const SceneObject& object, std::string_view name);

/// Ray from kProbeStandoff outside the feature straight into the surface,
/// offset in the surface plane by a uniform sample of the disc of radius
/// `jitter`.
Ray probe_ray(const Feature& f, double jitter, std::mt19937_64& rng);

}  // namespace tmm::sim
