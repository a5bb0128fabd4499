#include <gtest/gtest.h>

#include "support.hpp"
#include "tmm/error.hpp"
#include "tmm/spatial_index.hpp"

using namespace tmm;
using namespace tmm::testing;

namespace {

LayerIndex layer_of(const std::string& id, std::vector<Mesh> meshes, std::int64_t ms = 0) {
  return build_layer(id, Timestamp::from_unix_ms(ms), meshes, RigidTransform::identity());
}

}  // namespace

TEST(Ray, MakeRequiresUnitDirection) {
  EXPECT_THROW(Ray::make({0, 0, 0}, {0, 0, 2}), Error);
  EXPECT_THROW(Ray::toward({0, 0, 0}, {0, 0, 0}), Error);
  EXPECT_NEAR(Ray::toward({0, 0, 0}, {0, 3, 4}).direction.norm(), 1.0, 1e-15);
}

TEST(Intersect, HitsFrontAndBackFaces) {
  const Point3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  const auto down = intersect_triangle(Ray::make({0.2, 0.2, 1}, {0, 0, -1}), a, b, c);
  const auto up = intersect_triangle(Ray::make({0.2, 0.2, -1}, {0, 0, 1}), a, b, c);
  ASSERT_TRUE(down && up);
  EXPECT_DOUBLE_EQ(*down, 1.0);
  EXPECT_DOUBLE_EQ(*up, 1.0);
}

TEST(Intersect, MissesParallelBehindAndDegenerate) {
  const Point3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  EXPECT_FALSE(intersect_triangle(Ray::make({0.2, 0.2, 1}, {1, 0, 0}), a, b, c));
  EXPECT_FALSE(intersect_triangle(Ray::make({0.2, 0.2, 1}, {0, 0, 1}), a, b, c));
  EXPECT_FALSE(intersect_triangle(Ray::make({2, 2, 1}, {0, 0, -1}), a, b, c));
  EXPECT_FALSE(intersect_triangle(Ray::make({0.5, 0, 1}, {0, 0, -1}), a, b, {2, 0, 0}));
  // Origin on the surface: distance 0 is not a hit.
  EXPECT_FALSE(intersect_triangle(Ray::make({0.2, 0.2, 0}, {0, 0, -1}), a, b, c));
}

TEST(Layer, EmptyLayerNeverHits) {
  const auto l = layer_of("e", {});
  EXPECT_FALSE(l.intersect(Ray::make({0, 0, 0}, {0, 0, 1})));
}

TEST(Layer, SharedEdgesAreWatertight) {
  // Rays through every interior grid edge and vertex must hit something.
  const auto l = layer_of("g", {grid_mesh(8, 1.0, 0.0)});
  for (int j = 1; j < 8; ++j) {
    for (int i = 0; i <= 16; ++i) {
      const double x = i / 16.0 * 0.999 + 0.0005;
      for (const Point3 o : {Point3(x, j / 8.0, 1), Point3(j / 8.0, x, 1), Point3(x, x, 1)}) {
        const auto h = l.intersect(Ray::make(o, {0, 0, -1}));
        ASSERT_TRUE(h) << o.transpose();
        EXPECT_DOUBLE_EQ(h->ray_distance, 1.0);
      }
    }
  }
}

TEST(Layer, SharedEdgeTieGoesToLowerTriangle) {
  const auto l = layer_of("g", {grid_mesh(1, 1.0, 0.0)});
  const auto h = l.intersect(Ray::make({0.5, 0.5, 1}, {0, 0, -1}));  // on the diagonal
  ASSERT_TRUE(h);
  EXPECT_EQ(h->triangle_index, 0u);
}

TEST(Layer, AnchorPoseIsAppliedAtBuild) {
  const std::vector<Mesh> meshes{grid_mesh(2, 1.0, 0.0)};
  const auto l = build_layer("a", Timestamp{}, meshes, RigidTransform::translation({0, 0, 0.5}));
  const auto h = l.intersect(Ray::make({0.3, 0.3, 2}, {0, 0, -1}));
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->point.z(), 0.5, 1e-15);
}

TEST(RayCast, NearestLayerWinsAndTiesGoToLowerOrdinal) {
  const auto lower = layer_of("lower", {grid_mesh(2, 1.0, 0.0)}, 1);
  const auto upper = layer_of("upper", {grid_mesh(2, 1.0, 0.3)}, 2);
  const auto twin = layer_of("twin", {grid_mesh(2, 1.0, 0.3)}, 3);
  const Ray r = Ray::make({0.3, 0.6, 1}, {0, 0, -1});
  const LayerIndex* ordered[] = {&lower, &upper, &twin};
  const auto h = ray_cast(ordered, r);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->layer_id, "upper");
  EXPECT_EQ(h->layer_ordinal, 1u);
  EXPECT_EQ(h->timestamp, Timestamp::from_unix_ms(2));
  const LayerIndex* swapped[] = {&twin, &upper};
  EXPECT_EQ(ray_cast(swapped, r)->layer_id, "twin");
  const LayerIndex* only_lower[] = {&lower};
  EXPECT_EQ(ray_cast(only_lower, r)->layer_id, "lower");
  const LayerIndex* none[] = {&lower};
  EXPECT_FALSE(ray_cast(none, Ray::make({5, 5, 1}, {0, 0, -1})));
}

TEST(RayCast, MatchesTestOracleOnRandomScenes) {
  std::mt19937_64 rng(3);
  std::vector<OracleLayer> scene(3);
  std::vector<LayerIndex> layers;
  for (std::size_t l = 0; l < scene.size(); ++l) {
    scene[l].meshes = {random_soup(rng, 300, -1, 1, 0.3), random_soup(rng, 100, -1, 1, 0.6)};
    layers.push_back(layer_of("L" + std::to_string(l), scene[l].meshes));
  }
  std::vector<const LayerIndex*> ptrs;
  for (const auto& l : layers) ptrs.push_back(&l);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Ray r = Ray::make(random_point(rng, -1.5, 1.5), random_unit(rng));
    const auto got = ray_cast(ptrs, r);
    const auto want = oracle_cast(scene, r.origin, r.direction);
    ASSERT_EQ(got.has_value(), want.has_value()) << i;
    if (!got) continue;
    ++hits;
    EXPECT_EQ(got->layer_ordinal, want->layer);
    EXPECT_EQ(got->mesh_index, want->mesh);
    EXPECT_EQ(got->triangle_index, want->triangle);
    EXPECT_NEAR(got->ray_distance, want->distance, 1e-9);
  }
  EXPECT_GT(hits, 300);
}

TEST(RayCast, BvhAgreesWithLinearScan) {
  std::mt19937_64 rng(5);
  const auto l = layer_of("s", {random_soup(rng, 2000, 0, 2, 0.2), grid_mesh(10, 2.0, 1.0)});
  EXPECT_GT(l.node_count(), 1u);
  for (int i = 0; i < 500; ++i) {
    const Ray r = Ray::make(random_point(rng, -0.5, 2.5), random_unit(rng));
    const auto a = l.intersect(r);
    const auto b = l.intersect_brute_force(r);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(a->triangle_index, b->triangle_index);
      EXPECT_EQ(a->mesh_index, b->mesh_index);
      EXPECT_EQ(a->ray_distance, b->ray_distance);
    }
  }
}
