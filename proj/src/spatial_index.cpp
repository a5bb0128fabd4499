#include "tmm/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "tmm/error.hpp"

namespace tmm {

namespace {

constexpr std::uint32_t kLeafSize = 4;
// Barycentric slack so a ray through a shared edge is not rejected by both
// incident triangles.
constexpr double kBarycentricSlack = 1e-10;

bool ray_box(const Ray& ray, const Eigen::AlignedBox3d& box, double t_max, double& t_entry) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    const double o = ray.origin[k];
    const double d = ray.direction[k];
    const double lo = box.min()[k];
    const double hi = box.max()[k];
    if (d == 0.0) {
      if (o < lo || o > hi) return false;
      continue;
    }
    double a = (lo - o) / d;
    double b = (hi - o) / d;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  t_entry = t0;
  return true;
}

}  // namespace

Ray Ray::make(const Point3& origin, const Vector3& direction) {
  if (!is_finite(origin) || !is_finite(direction) ||
      std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "ray direction must be a unit vector");
  }
  return Ray{origin, direction};
}

Ray Ray::toward(const Point3& origin, const Vector3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !is_finite(origin)) {
    throw Error(ErrorCode::InvalidArgument, "ray direction must be non-zero and finite");
  }
  return Ray{origin, direction / n};
}

std::optional<double> intersect_triangle(const Ray& ray, const Point3& a, const Point3& b,
                                         const Point3& c) {
  const Vector3 e1 = b - a;
  const Vector3 e2 = c - a;
  if (e1.cross(e2).squaredNorm() <= 0.0) return std::nullopt;  // zero area

  const Vector3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kDeterminantEpsilon) return std::nullopt;
  const double inv_det = 1.0 / det;

  const Vector3 tvec = ray.origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kBarycentricSlack || u > 1.0 + kBarycentricSlack) return std::nullopt;

  const Vector3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv_det;
  if (v < -kBarycentricSlack || u + v > 1.0 + kBarycentricSlack) return std::nullopt;

  const double t = e2.dot(qvec) * inv_det;
  if (!(t > kMinHitDistance)) return std::nullopt;
  return t;
}

bool hit_precedes(const Hit& a, const Hit& b) {
  if (a.ray_distance < b.ray_distance - kTieEpsilon) return true;
  if (a.ray_distance > b.ray_distance + kTieEpsilon) return false;
  return std::tie(a.layer_ordinal, a.mesh_index, a.triangle_index) <
         std::tie(b.layer_ordinal, b.mesh_index, b.triangle_index);
}

LayerIndex build_layer(std::string id, Timestamp ts, std::span<const Mesh> meshes,
                       const RigidTransform& to_world) {
  LayerIndex index;
  index.layer_id_ = std::move(id);
  index.timestamp_ = ts;

  for (std::uint32_t m = 0; m < meshes.size(); ++m) {
    const auto verts = meshes[m].vertices();
    std::vector<Point3> world;
    world.reserve(verts.size());
    for (const auto& v : verts) world.push_back(to_world.apply(v));
    const auto tris = meshes[m].triangles();
    for (std::uint32_t t = 0; t < tris.size(); ++t) {
      index.triangles_.push_back(
          {world[tris[t][0]], world[tris[t][1]], world[tris[t][2]], m, t});
    }
  }

  if (!index.triangles_.empty()) {
    std::vector<Point3> centroids;
    centroids.reserve(index.triangles_.size());
    for (const auto& tri : index.triangles_) centroids.push_back((tri.a + tri.b + tri.c) / 3.0);
    index.nodes_.reserve(2 * index.triangles_.size() / kLeafSize + 1);
    index.build_recursive(0, static_cast<std::uint32_t>(index.triangles_.size()), centroids);
  }
  return index;
}

std::uint32_t LayerIndex::build_recursive(std::uint32_t begin, std::uint32_t end,
                                          std::vector<Point3>& centroids) {
  const auto node_id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});

  Eigen::AlignedBox3d bounds;
  Eigen::AlignedBox3d centroid_bounds;
  for (auto i = begin; i < end; ++i) {
    bounds.extend(triangles_[i].a).extend(triangles_[i].b).extend(triangles_[i].c);
    centroid_bounds.extend(centroids[i]);
  }
  nodes_[node_id].bounds = bounds;

  const Vector3 extent = centroid_bounds.sizes();
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  if (end - begin <= kLeafSize || extent[axis] <= 0.0) {
    nodes_[node_id].first = begin;
    nodes_[node_id].count = end - begin;
    return node_id;
  }

  // Median split along the widest centroid axis; triangles and centroids are
  // permuted together so the stable order keeps the build deterministic.
  const auto mid = begin + (end - begin) / 2;
  std::vector<std::uint32_t> order(end - begin);
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = begin + i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t l, std::uint32_t r) {
    return centroids[l][axis] < centroids[r][axis];
  });
  std::vector<IndexedTriangle> tris;
  std::vector<Point3> cents;
  tris.reserve(order.size());
  cents.reserve(order.size());
  for (auto i : order) {
    tris.push_back(triangles_[i]);
    cents.push_back(centroids[i]);
  }
  std::copy(tris.begin(), tris.end(), triangles_.begin() + begin);
  std::copy(cents.begin(), cents.end(), centroids.begin() + begin);

  build_recursive(begin, mid, centroids);  // left child is node_id + 1
  const auto right = build_recursive(mid, end, centroids);
  nodes_[node_id].first = right;
  nodes_[node_id].count = 0;
  return node_id;
}

Hit LayerIndex::make_hit(const Ray& ray, double t, const IndexedTriangle& tri) const {
  Hit h;
  h.point = ray.at(t);
  h.ray_distance = t;
  h.layer_id = layer_id_;
  h.timestamp = timestamp_;
  h.mesh_index = tri.mesh_index;
  h.triangle_index = tri.triangle_index;
  return h;
}

std::optional<Hit> LayerIndex::intersect(const Ray& ray) const {
  if (nodes_.empty()) return std::nullopt;

  std::optional<Hit> best;
  const IndexedTriangle* best_tri = nullptr;
  double best_t = std::numeric_limits<double>::infinity();

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const auto& node = nodes_[stack[--top]];
    double entry = 0.0;
    if (!ray_box(ray, node.bounds, best_t + kTieEpsilon, entry)) continue;

    if (node.count > 0) {
      for (auto i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = triangles_[i];
        const auto t = intersect_triangle(ray, tri.a, tri.b, tri.c);
        if (!t) continue;
        const bool nearer = *t < best_t - kTieEpsilon;
        const bool tied_lower =
            !nearer && best_tri && *t <= best_t + kTieEpsilon &&
            std::tie(tri.mesh_index, tri.triangle_index) <
                std::tie(best_tri->mesh_index, best_tri->triangle_index);
        if (!best_tri || nearer || tied_lower) {
          best_t = *t;
          best_tri = &tri;
        }
      }
      continue;
    }

    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.first;
    double el = 0.0;
    double er = 0.0;
    const bool hl = ray_box(ray, nodes_[left].bounds, best_t + kTieEpsilon, el);
    const bool hr = ray_box(ray, nodes_[right].bounds, best_t + kTieEpsilon, er);
    // Push the farther child first so the nearer one is visited next.
    if (hl && hr) {
      if (el <= er) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hl) {
      stack[top++] = left;
    } else if (hr) {
      stack[top++] = right;
    }
  }

  if (best_tri) best = make_hit(ray, best_t, *best_tri);
  return best;
}

std::optional<Hit> LayerIndex::intersect_brute_force(const Ray& ray) const {
  std::optional<Hit> best;
  for (const auto& tri : triangles_) {
    const auto t = intersect_triangle(ray, tri.a, tri.b, tri.c);
    if (!t) continue;
    Hit h = make_hit(ray, *t, tri);
    if (!best || hit_precedes(h, *best)) best = std::move(h);
  }
  return best;
}

LayerIndex build_index(const Snapshot& s) {
  return build_layer(s.id(), s.timestamp(), s.meshes(), s.anchor_pose());
}

LayerIndex build_live_index(std::span<const Mesh> live, Timestamp scanned_at) {
  return build_layer(std::string(kLiveLayerId), scanned_at, live, RigidTransform::identity());
}

std::optional<Hit> ray_cast(std::span<const LayerIndex* const> layers, const Ray& ray) {
  std::optional<Hit> best;
  for (std::size_t ordinal = 0; ordinal < layers.size(); ++ordinal) {
    if (!layers[ordinal]) continue;
    auto h = layers[ordinal]->intersect(ray);
    if (!h) continue;
    h->layer_ordinal = ordinal;
    if (!best || hit_precedes(*h, *best)) best = std::move(h);
  }
  return best;
}

std::optional<Hit> ray_cast(std::span<const std::shared_ptr<const LayerIndex>> layers,
                            const Ray& ray) {
  std::vector<const LayerIndex*> raw;
  raw.reserve(layers.size());
  for (const auto& l : layers) raw.push_back(l.get());
  return ray_cast(std::span<const LayerIndex* const>(raw), ray);
}

}  // namespace tmm
