#include "tmm/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tmm/error.hpp"

namespace tmm::sim {

namespace {

constexpr double kBoundsSlack = 1e-9;

std::array<Point3, 8> corners(const SceneObject& o) {
  std::array<Point3, 8> out;
  int k = 0;
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      for (double sz : {0.0, 1.0}) {
        out[k++] = o.pose.apply(Point3(sx * o.size.x(), sy * o.size.y(), sz * o.size.z()));
      }
    }
  }
  return out;
}

void check_inside(const RoomSize& room, const SceneObject& o) {
  for (const auto& c : corners(o)) {
    if (c.x() < -kBoundsSlack || c.y() < -kBoundsSlack || c.z() < -kBoundsSlack ||
        c.x() > room.width + kBoundsSlack || c.y() > room.depth + kBoundsSlack ||
        c.z() > room.height + kBoundsSlack) {
      throw Error(ErrorCode::ObjectOutsideRoom, "object '" + o.id + "' leaves the room");
    }
  }
}

/// Appends a grid over the rectangle origin + [0,1]·u + [0,1]·v with
/// normal u × v.
void add_face(std::vector<Point3>& verts, std::vector<Triangle>& tris, const Point3& origin,
              const Vector3& u, const Vector3& v, double edge, double sigma,
              std::mt19937_64& rng) {
  const int nu = std::max(1, static_cast<int>(std::ceil(u.norm() / edge - 1e-9)));
  const int nv = std::max(1, static_cast<int>(std::ceil(v.norm() / edge - 1e-9)));
  const Vector3 normal = u.cross(v).normalized();
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto base = static_cast<std::uint32_t>(verts.size());
  for (int j = 0; j <= nv; ++j) {
    for (int i = 0; i <= nu; ++i) {
      Point3 p = origin + (static_cast<double>(i) / nu) * u + (static_cast<double>(j) / nv) * v;
      if (sigma > 0.0) p += sigma * noise(rng) * normal;
      verts.push_back(p);
    }
  }
  const auto row = static_cast<std::uint32_t>(nu + 1);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const std::uint32_t a = base + j * row + i;
      const std::uint32_t b = a + 1;
      const std::uint32_t c = a + row;
      const std::uint32_t d = c + 1;
      tris.push_back({a, b, d});
      tris.push_back({a, d, c});
    }
  }
}

}  // namespace

const SceneObject& Scene::object(std::string_view id) const {
  for (const auto& o : spec_.objects) {
    if (o.id == id) return o;
  }
  throw Error(ErrorCode::UnknownObject, "no object '" + std::string(id) + "'");
}

SceneObject& Scene::object_mut(std::string_view id) {
  return const_cast<SceneObject&>(static_cast<const Scene&>(*this).object(id));
}

double Scene::net_displacement(std::string_view id) const {
  const auto& now = object(id);
  for (const auto& o : initial_) {
    if (o.id == id) return (now.reference_point() - o.reference_point()).norm();
  }
  return 0.0;
}

Scene generate_scene(SceneSpec spec) {
  const auto& r = spec.room;
  if (!(r.width > 0 && r.depth > 0 && r.height > 0)) {
    throw Error(ErrorCode::InvalidArgument, "room dimensions must be positive");
  }
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    if (!(o.size.minCoeff() > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "object '" + o.id + "' needs positive size");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.objects[j].id == o.id) {
        throw Error(ErrorCode::InvalidArgument, "duplicate object id '" + o.id + "'");
      }
    }
    check_inside(r, o);
  }
  Scene s;
  s.spec_ = std::move(spec);
  s.initial_ = s.spec_.objects;
  return s;
}

Scene move_object(Scene scene, std::string_view id, const RigidTransform& motion) {
  auto& o = scene.object_mut(id);
  const Point3 before = o.reference_point();
  SceneObject moved = o;
  moved.pose = compose(motion, o.pose);
  check_inside(scene.spec_.room, moved);
  o = moved;
  scene.moves_.push_back({o.id, motion, (o.reference_point() - before).norm()});
  return scene;
}

RigidTransform object_motion(const SceneObject& object, const Vector3& t, double yaw_radians) {
  const Point3 c = object.reference_point();
  return compose(RigidTransform::translation(c + t),
                 compose(RigidTransform::from_yaw(yaw_radians), RigidTransform::translation(-c)));
}

std::vector<Mesh> sample_scan(const Scene& scene, const ScanConfig& config) {
  if (!(config.edge_length > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scan edge length must be positive");
  }
  if (!(config.noise_sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  }
  std::mt19937_64 rng(config.seed);
  const double e = config.edge_length;
  const double s = config.noise_sigma;
  std::vector<Mesh> out;

  {
    const auto& r = scene.spec().room;
    const Vector3 X(r.width, 0, 0), Y(0, r.depth, 0), Z(0, 0, r.height);
    const Point3 O = Point3::Zero();
    std::vector<Point3> v;
    std::vector<Triangle> t;
    add_face(v, t, O, X, Y, e, s, rng);          // floor, normal +z
    add_face(v, t, O + Z, Y, X, e, s, rng);      // ceiling, normal −z
    add_face(v, t, O, Z, X, e, s, rng);          // y = 0 wall, normal +y
    add_face(v, t, O + Y, X, Z, e, s, rng);      // y = depth wall, normal −y
    add_face(v, t, O, Y, Z, e, s, rng);          // x = 0 wall, normal +x
    add_face(v, t, O + X, Z, Y, e, s, rng);      // x = width wall, normal −x
    out.push_back(make_mesh(std::move(v), std::move(t)));
  }

  for (const auto& o : scene.spec().objects) {
    const double hx = o.size.x() / 2, hy = o.size.y() / 2, h = o.size.z();
    const Matrix3& R = o.pose.rotation();
    const auto P = [&](double x, double y, double z) { return o.pose.apply(Point3(x, y, z)); };
    const Vector3 ux = R * Vector3(o.size.x(), 0, 0);
    const Vector3 uy = R * Vector3(0, o.size.y(), 0);
    const Vector3 uz = R * Vector3(0, 0, h);
    std::vector<Point3> v;
    std::vector<Triangle> t;
    add_face(v, t, P(-hx, -hy, h), ux, uy, e, s, rng);   // top, +z
    add_face(v, t, P(-hx, -hy, 0), ux, uz, e, s, rng);   // front, −y
    add_face(v, t, P(-hx, hy, 0), uz, ux, e, s, rng);    // back, +y
    add_face(v, t, P(-hx, -hy, 0), uz, uy, e, s, rng);   // left, −x
    add_face(v, t, P(hx, -hy, 0), uy, uz, e, s, rng);    // right, +x
    out.push_back(make_mesh(std::move(v), std::move(t)));
  }
  return out;
}

Feature feature(const SceneObject& o, std::string_view name) {
  const double hx = o.size.x() / 2, hy = o.size.y() / 2, h = o.size.z();
  const double ix = std::max(0.0, hx - kFeatureInset);
  const double iy = std::max(0.0, hy - kFeatureInset);
  Point3 local;
  Vector3 n, tu, tv;
  if (name.starts_with("top-")) {
    n = Vector3::UnitZ();
    tu = Vector3::UnitX();
    tv = Vector3::UnitY();
    if (name == "top-center") {
      local = {0, 0, h};
    } else if (name == "top-front-left") {
      local = {-ix, -iy, h};
    } else if (name == "top-front-right") {
      local = {ix, -iy, h};
    } else if (name == "top-back-left") {
      local = {-ix, iy, h};
    } else if (name == "top-back-right") {
      local = {ix, iy, h};
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
    }
  } else if (name == "front-center") {
    local = {0, -hy, h / 2};
    n = -Vector3::UnitY();
    tu = Vector3::UnitX();
    tv = Vector3::UnitZ();
  } else if (name == "back-center") {
    local = {0, hy, h / 2};
    n = Vector3::UnitY();
    tu = Vector3::UnitX();
    tv = Vector3::UnitZ();
  } else if (name == "left-center") {
    local = {-hx, 0, h / 2};
    n = -Vector3::UnitX();
    tu = Vector3::UnitY();
    tv = Vector3::UnitZ();
  } else if (name == "right-center") {
    local = {hx, 0, h / 2};
    n = Vector3::UnitX();
    tu = Vector3::UnitY();
    tv = Vector3::UnitZ();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
  }
  const Matrix3& R = o.pose.rotation();
  return {o.pose.apply(local), R * n, R * tu, R * tv};
}

Ray probe_ray(const Feature& f, double jitter, std::mt19937_64& rng) {
  Point3 target = f.point;
  if (jitter > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = jitter * std::sqrt(unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    target += radius * (std::cos(angle) * f.tangent_u + std::sin(angle) * f.tangent_v);
  }
  return Ray{target + kProbeStandoff * f.normal, -f.normal};
}

}  // namespace tmm::sim
