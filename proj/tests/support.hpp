#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tmm/mesh.hpp"
#include "tmm/snapshot.hpp"
#include "tmm/spatial_index.hpp"
#include "tmm/transform.hpp"

namespace tmm::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& p);

Point3 random_point(std::mt19937_64& rng, double lo, double hi);
Vector3 random_unit(std::mt19937_64& rng);
RigidTransform random_rigid(std::mt19937_64& rng, double max_translation);

/// Triangle soup: n triangles with vertices in [lo, hi]^3, edges up to `span`.
Mesh random_soup(std::mt19937_64& rng, std::size_t n, double lo, double hi, double span);
/// n×n grid of squares (2 triangles each) on the plane z = height.
Mesh grid_mesh(std::size_t n, double size, double height);
/// Mesh with `vertices` vertices spread over many magnitudes (including
/// negative zero and subnormals) and random triangles.
Mesh wild_mesh(std::mt19937_64& rng, std::size_t vertices);
Snapshot random_snapshot(std::mt19937_64& rng, std::size_t max_vertices);

/// Test-side ray/triangle oracle: plane intersection followed by an
/// edge-function inside test. Independent of the library's intersection code.
std::optional<double> oracle_intersect(const Point3& o, const Vector3& d, const Point3& a,
                                       const Point3& b, const Point3& c);

struct OracleHit {
  std::size_t layer = 0;
  std::uint32_t mesh = 0;
  std::uint32_t triangle = 0;
  double distance = 0.0;
};
struct OracleLayer {
  std::vector<Mesh> meshes;  // world frame
};
/// Nearest hit over every triangle of every layer; earlier layers, meshes and
/// triangles win exact ties.
std::optional<OracleHit> oracle_cast(const std::vector<OracleLayer>& layers, const Point3& o,
                                     const Vector3& d);

/// Independent rigid estimate for cross-checking: Horn's closed-form
/// quaternion method.
RigidTransform horn_estimate(const std::vector<std::pair<Point3, Point3>>& pairs);

}  // namespace tmm::testing
