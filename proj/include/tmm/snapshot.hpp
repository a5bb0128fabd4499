#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/mesh.hpp"
#include "tmm/timestamp.hpp"
#include "tmm/transform.hpp"

namespace tmm {

inline constexpr int kSnapshotFormatVersion = 1;
inline constexpr std::string_view kSnapshotExtension = ".tmm.xml";

/// Timestamped, storage-independent copy of a mesh set plus the pose that
/// maps snapshot-local coordinates to the world frame. Immutable.
class Snapshot {
 public:
  Snapshot() = default;

  const std::string& id() const { return id_; }
  std::span<const Mesh> meshes() const { return meshes_; }
  Timestamp timestamp() const { return timestamp_; }
  const RigidTransform& anchor_pose() const { return anchor_pose_; }

  std::size_t vertex_count() const;
  std::size_t triangle_count() const;

  /// Field-wise equality (coordinates bitwise); the id is derived from the
  /// content so it is compared too.
  friend bool operator==(const Snapshot& a, const Snapshot& b);

 private:
  friend Snapshot make_snapshot(std::vector<Mesh> meshes, Timestamp timestamp,
                                const RigidTransform& anchor);

  std::string id_;
  std::vector<Mesh> meshes_;
  Timestamp timestamp_;
  RigidTransform anchor_pose_;
};

/// Builds a snapshot and assigns its content-addressed id.
Snapshot make_snapshot(std::vector<Mesh> meshes, Timestamp timestamp,
                       const RigidTransform& anchor);

/// Deep copy of the live meshes stamped with `now`.
Snapshot capture_snapshot(std::span<const Mesh> live_meshes, const RigidTransform& anchor,
                          Timestamp now);

/// Applies a rigid motion to every vertex; triangles, timestamp and anchor
/// are kept. The id changes with the content.
Snapshot apply(const RigidTransform& motion, const Snapshot& s);

/// XML document (see README for the schema). Doubles are written in shortest
/// round-trip form, so parsing reproduces every value bit-exactly.
std::string serialize_snapshot(const Snapshot& s);

/// Throws MalformedDocument, SchemaViolation or UnsupportedVersion.
Snapshot deserialize_snapshot(std::string_view doc);

/// First 16 hex digits of SHA-256 over the bytes.
std::string content_hash(std::string_view bytes);

}  // namespace tmm
