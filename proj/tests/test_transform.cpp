#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tmm/error.hpp"
#include "tmm/transform.hpp"

using namespace tmm;
using namespace tmm::testing;

namespace {

void expect_near(const RigidTransform& a, const RigidTransform& b, double tol) {
  EXPECT_LT(rotation_angle_between(a.rotation(), b.rotation()), tol);
  EXPECT_LT((a.translation() - b.translation()).norm(), tol);
}

std::vector<std::pair<Point3, Point3>> pairs_for(const RigidTransform& t,
                                                 const std::vector<Point3>& pts) {
  std::vector<std::pair<Point3, Point3>> out;
  for (const auto& p : pts) out.emplace_back(p, t.apply(p));
  return out;
}

}  // namespace

TEST(Rigid, RejectsNonRotations) {
  Matrix3 reflect = Matrix3::Identity();
  reflect(2, 2) = -1;
  EXPECT_THROW(rigid_from_parts(reflect, Vector3::Zero()), Error);
  EXPECT_THROW(rigid_from_parts(2 * Matrix3::Identity(), Vector3::Zero()), Error);
  EXPECT_NO_THROW(rigid_from_parts(Matrix3::Identity(), Vector3(1, 2, 3)));
}

TEST(Rigid, GroupLaws) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_rigid(rng, 5), b = random_rigid(rng, 5), c = random_rigid(rng, 5);
    expect_near(compose(a, invert(a)), RigidTransform::identity(), 1e-12);
    expect_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-12);
    const Point3 p = random_point(rng, -3, 3);
    EXPECT_LT((compose(a, b).apply(p) - a.apply(b.apply(p))).norm(), 1e-12);
    EXPECT_LT((invert(a).apply(a.apply(p)) - p).norm(), 1e-12);
  }
}

TEST(Rigid, HomogeneousForm) {
  const auto t = RigidTransform::from_yaw(std::numbers::pi / 2, {1, 2, 3});
  const Eigen::Matrix4d h = t.homogeneous();
  EXPECT_NEAR(h(0, 1), -1.0, 1e-15);
  EXPECT_EQ(h(0, 3), 1.0);
  EXPECT_EQ(h(3, 3), 1.0);
  EXPECT_EQ(h(3, 0), 0.0);
}

TEST(Rigid, ApplyToMeshIsAnIsometry) {
  std::mt19937_64 rng(2);
  const Mesh m = random_soup(rng, 50, -1, 1, 0.5);
  const auto t = random_rigid(rng, 10);
  const Mesh moved = apply(t, m);
  ASSERT_EQ(moved.triangles().size(), m.triangles().size());
  for (std::size_t i = 1; i < m.vertex_count(); ++i) {
    const double before = (m.vertices()[i] - m.vertices()[i - 1]).norm();
    const double after = (moved.vertices()[i] - moved.vertices()[i - 1]).norm();
    EXPECT_NEAR(before, after, 1e-12);
  }
}

TEST(Estimate, RecoversExactTransformAndMatchesHorn) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto truth = random_rigid(rng, 10);
    std::vector<Point3> pts;
    for (int k = 0; k < 10; ++k) pts.push_back(random_point(rng, -1, 1));
    const auto pairs = pairs_for(truth, pts);
    const auto est = estimate_rigid(pairs);
    expect_near(est, truth, 1e-9);
    expect_near(est, horn_estimate(pairs), 1e-9);
  }
}

TEST(Estimate, ThreePointsSuffice) {
  const auto truth = RigidTransform::from_yaw(0.3, {0.87, 0, 0});
  const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  expect_near(estimate_rigid(pairs_for(truth, pts)), truth, 1e-12);
}

TEST(Estimate, NeverReturnsAReflection) {
  // Targets are a mirror image of the sources: best proper rotation only.
  const std::vector<std::pair<Point3, Point3>> pairs{
      {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}, {{0, 0, 1}, {0, 0, -1}}, {{1, 1, 1}, {1, 1, -1}}};
  const auto est = estimate_rigid(pairs);
  EXPECT_NEAR(est.rotation().determinant(), 1.0, 1e-12);
}

TEST(Estimate, DegenerateInputsThrow) {
  const std::vector<std::pair<Point3, Point3>> two{{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}};
  const std::vector<std::pair<Point3, Point3>> collinear{
      {{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{2, 0, 0}, {2, 0, 0}}};
  const std::vector<std::pair<Point3, Point3>> coincident{
      {{1, 1, 1}, {0, 0, 0}}, {{1, 1, 1}, {1, 0, 0}}, {{1, 1, 1}, {2, 0, 0}}};
  for (const auto* set : {&two, &collinear, &coincident}) {
    try {
      estimate_rigid(*set);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
    }
  }
}

TEST(Estimate, NoiseErrorShrinksWithPointCount) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto mean_error = [&](int n) {
    double sum = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto truth = random_rigid(rng, 2);
      std::vector<std::pair<Point3, Point3>> pairs;
      for (int k = 0; k < n; ++k) {
        const Point3 p = random_point(rng, -1, 1);
        pairs.emplace_back(p, truth.apply(p) + Vector3(noise(rng), noise(rng), noise(rng)));
      }
      sum += (estimate_rigid(pairs).translation() - truth.translation()).norm();
    }
    return sum / 100;
  };
  const double e10 = mean_error(10), e160 = mean_error(160);
  EXPECT_LT(e160, e10 / 2.5);
  EXPECT_LT(e160, 3 * 0.01 / std::sqrt(160.0));
}

TEST(View, ManipulationComposesAndRejectsBadScale) {
  ViewState v;
  v = manipulate_view(v, 0.5, RigidTransform::translation({1, 0, 0}));
  v = manipulate_view(v, 0.5, RigidTransform::identity());
  EXPECT_DOUBLE_EQ(v.scale, 0.25);
  EXPECT_LT((v.to_display({1, 1, 1}) - Point3(0.5, 0.25, 0.25)).norm(), 1e-15);
  EXPECT_THROW(manipulate_view(v, 0.0, {}), Error);
  EXPECT_THROW(manipulate_view(v, -2.0, {}), Error);
}

TEST(View, TrailIsExpressedInDisplayFrame) {
  ViewState v;
  v = manipulate_view(v, 0.1, RigidTransform::from_yaw(0.5, {0, 0, 0}));
  const std::vector<Point3> world{{1, 1.5, 0.4}, {1.87, 1.5, 0.4}, {2.44, 2.58, 0.4}};
  const auto trail = trail_in_view(v, world);
  ASSERT_EQ(trail.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_NEAR((trail[i] - trail[i - 1]).norm(), 0.1 * (world[i] - world[i - 1]).norm(), 1e-12);
  }
}
