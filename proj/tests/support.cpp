#include "support.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <unistd.h>

namespace tmm::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("tmm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixture(const std::string& name) { return fs::path(TMM_FIXTURE_DIR) / name; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Point3 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Vector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3 v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

RigidTransform random_rigid(std::mt19937_64& rng, double max_translation) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return rigid_from_parts(q.toRotationMatrix(),
                          random_point(rng, -max_translation, max_translation));
}

Mesh random_soup(std::mt19937_64& rng, std::size_t n, double lo, double hi, double span) {
  std::vector<Point3> v;
  std::vector<Triangle> t;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 base = random_point(rng, lo, hi);
    const auto k = static_cast<std::uint32_t>(v.size());
    v.push_back(base);
    v.push_back(base + random_point(rng, -span, span));
    v.push_back(base + random_point(rng, -span, span));
    t.push_back({k, k + 1, k + 2});
  }
  return make_mesh(std::move(v), std::move(t));
}

Mesh grid_mesh(std::size_t n, double size, double height) {
  std::vector<Point3> v;
  std::vector<Triangle> t;
  const double h = size / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) v.emplace_back(i * h, j * h, height);
  }
  const auto at = [n](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>(j * (n + 1) + i);
  };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      t.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return make_mesh(std::move(v), std::move(t));
}

Mesh wild_mesh(std::mt19937_64& rng, std::size_t vertices) {
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-40, 40);
  std::uniform_int_distribution<int> kind(0, 19);
  std::vector<Point3> v(vertices);
  for (auto& p : v) {
    for (int k = 0; k < 3; ++k) {
      switch (kind(rng)) {
        case 0: p[k] = -0.0; break;
        case 1: p[k] = std::numeric_limits<double>::denorm_min() * (1 + expo(rng) + 40); break;
        case 2: p[k] = std::numeric_limits<double>::max() * mant(rng); break;
        default: p[k] = std::ldexp(mant(rng), expo(rng)); break;
      }
    }
  }
  std::vector<Triangle> t;
  if (vertices > 0) {
    std::uniform_int_distribution<std::uint32_t> idx(0, static_cast<std::uint32_t>(vertices - 1));
    t.resize(vertices / 2 + 1);
    for (auto& tri : t) tri = {idx(rng), idx(rng), idx(rng)};
  }
  return make_mesh(std::move(v), std::move(t));
}

Snapshot random_snapshot(std::mt19937_64& rng, std::size_t max_vertices) {
  // Log-uniform total size so small and large documents both appear.
  std::uniform_real_distribution<double> lg(0.0, std::log(static_cast<double>(max_vertices)));
  const auto total = static_cast<std::size_t>(std::exp(lg(rng)));
  std::uniform_int_distribution<int> parts(1, 4);
  const int n = parts(rng);
  std::vector<Mesh> meshes;
  for (int i = 0; i < n; ++i) meshes.push_back(wild_mesh(rng, total / n + (i == 0 ? total % n : 0)));
  std::uniform_int_distribution<std::int64_t> ms(0, 4102444800000);  // through 2100
  return make_snapshot(std::move(meshes), Timestamp::from_unix_ms(ms(rng)),
                       random_rigid(rng, 100.0));
}

std::optional<double> oracle_intersect(const Point3& o, const Vector3& d, const Point3& a,
                                       const Point3& b, const Point3& c) {
  const Vector3 n = (b - a).cross(c - a);
  const double nn = n.squaredNorm();
  if (nn == 0.0) return std::nullopt;
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-14 * std::sqrt(nn)) return std::nullopt;
  const double t = n.dot(a - o) / denom;
  if (!(t > 1e-9)) return std::nullopt;
  const Point3 p = o + t * d;
  const Point3* v[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    const Point3& p0 = *v[i];
    const Point3& p1 = *v[(i + 1) % 3];
    const double w = (p1 - p0).cross(p - p0).dot(n) / nn;
    if (w < -1e-10) return std::nullopt;
  }
  return t;
}

std::optional<OracleHit> oracle_cast(const std::vector<OracleLayer>& layers, const Point3& o,
                                     const Vector3& d) {
  std::optional<OracleHit> best;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t m = 0; m < layers[l].meshes.size(); ++m) {
      const auto& mesh = layers[l].meshes[m];
      const auto v = mesh.vertices();
      const auto tris = mesh.triangles();
      for (std::size_t k = 0; k < tris.size(); ++k) {
        const auto t = oracle_intersect(o, d, v[tris[k][0]], v[tris[k][1]], v[tris[k][2]]);
        if (t && (!best || *t < best->distance)) {
          best = OracleHit{l, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(k), *t};
        }
      }
    }
  }
  return best;
}

RigidTransform horn_estimate(const std::vector<std::pair<Point3, Point3>>& pairs) {
  Point3 cp = Point3::Zero(), cq = Point3::Zero();
  for (const auto& [p, q] : pairs) {
    cp += p;
    cq += q;
  }
  cp /= static_cast<double>(pairs.size());
  cq /= static_cast<double>(pairs.size());
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (const auto& [p, q] : pairs) s += (p - cp) * (q - cq).transpose();
  const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
  const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
  const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(n);
  const Eigen::Vector4d e = es.eigenvectors().col(3);
  const Eigen::Quaterniond q(e(0), e(1), e(2), e(3));
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  return rigid_from_parts(r, cq - r * cp);
}

}  // namespace tmm::testing
