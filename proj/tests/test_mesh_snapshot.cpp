#include <cmath>
#include <functional>
#include <set>
#include <limits>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tmm/error.hpp"
#include "tmm/snapshot.hpp"

using namespace tmm;
using tmm::testing::random_snapshot;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no tmm::Error thrown";
  return ErrorCode::InvalidArgument;
}

Mesh unit_triangle() {
  return make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Triangle{0, 1, 2}});
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Mesh, RejectsOutOfRangeIndex) {
  EXPECT_EQ(code_of([] { make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Triangle{0, 1, 3}}); }),
            ErrorCode::IndexOutOfRange);
}

TEST(Mesh, RejectsNonFiniteCoordinates) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { make_mesh({{nan, 0, 0}}, {}); }), ErrorCode::NonFiniteCoordinate);
  EXPECT_EQ(code_of([&] { make_mesh({{0, -inf, 0}}, {}); }), ErrorCode::NonFiniteCoordinate);
}

TEST(Mesh, EmptyAndDegenerateAreValid) {
  EXPECT_EQ(make_mesh({}, {}).vertex_count(), 0u);
  const Mesh m = make_mesh({{0, 0, 0}, {1, 1, 1}}, {Triangle{0, 0, 1}});
  EXPECT_EQ(m.triangle_count(), 1u);
}

TEST(Mesh, SetVertexValidatesAndLeavesMeshUntouched) {
  Mesh m = unit_triangle();
  const Mesh before = m;
  EXPECT_EQ(code_of([&] { m.set_vertex(3, {0, 0, 0}); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { m.set_vertex(0, {0, std::nan(""), 0}); }),
            ErrorCode::NonFiniteCoordinate);
  EXPECT_EQ(m, before);
  m.set_vertex(1, {2, 0, 0});
  EXPECT_EQ(m.vertices()[1], Point3(2, 0, 0));
}

TEST(Mesh, EqualityIsBitwise) {
  const Mesh a = make_mesh({{0.0, 0, 0}}, {});
  const Mesh b = make_mesh({{-0.0, 0, 0}}, {});
  EXPECT_FALSE(a == b);
}

TEST(Snapshot, CaptureIsADeepCopy) {
  std::vector<Mesh> live{unit_triangle()};
  const auto ts = Timestamp::parse_iso8601("2021-03-04T16:00:00.000Z");
  const Snapshot s = capture_snapshot(live, RigidTransform::identity(), ts);
  const std::string id = s.id();
  live[0].set_vertex(0, {5, 5, 5});
  EXPECT_EQ(s.meshes()[0].vertices()[0], Point3(0, 0, 0));
  EXPECT_EQ(content_hash(serialize_snapshot(s)), id);
  EXPECT_EQ(s.timestamp(), ts);
}

TEST(Snapshot, IdDependsOnContent) {
  const auto ts = Timestamp::from_unix_ms(1000);
  const Snapshot a = make_snapshot({unit_triangle()}, ts, {});
  const Snapshot b = make_snapshot({unit_triangle()}, ts, {});
  const Snapshot c = make_snapshot({unit_triangle()}, ts + std::chrono::milliseconds(1), {});
  EXPECT_EQ(a.id(), b.id());
  EXPECT_NE(a.id(), c.id());
  EXPECT_EQ(a.id().size(), 16u);
}

TEST(Snapshot, ApplyMovesVerticesAndKeepsTopology) {
  const Snapshot s = make_snapshot({unit_triangle()}, Timestamp::from_unix_ms(0), {});
  const Snapshot moved = apply(RigidTransform::translation({0.87, 0, 0}), s);
  EXPECT_EQ(moved.meshes()[0].vertices()[1], Point3(1.87, 0, 0));
  EXPECT_EQ(moved.meshes()[0].triangles()[0], s.meshes()[0].triangles()[0]);
  EXPECT_EQ(moved.timestamp(), s.timestamp());
  EXPECT_NE(moved.id(), s.id());
}

TEST(Serialization, RoundTripIsExact) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Snapshot s = random_snapshot(rng, 2000);
    const Snapshot back = deserialize_snapshot(serialize_snapshot(s));
    ASSERT_EQ(back, s);
    EXPECT_EQ(back.id(), s.id());
  }
}

TEST(Serialization, EmptySnapshotRoundTrips) {
  const Snapshot s = make_snapshot({}, Timestamp::from_unix_ms(0), {});
  EXPECT_EQ(deserialize_snapshot(serialize_snapshot(s)), s);
}

TEST(Serialization, WrongCountIsSchemaViolation) {
  const auto doc = serialize_snapshot(make_snapshot({unit_triangle()}, Timestamp{}, {}));
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, "<Vertices count=\"3\"", "<Vertices count=\"4\"")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, ">0 1 2<", ">0 1 7<")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, ">0 1 2<", ">0 1 x<")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, "m00=\"1\"", "m00=\"2\"")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, "1970-01-01", "1970-13-01")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, ">0 0 0 ", ">nan 0 0 ")); }),
            ErrorCode::SchemaViolation);
}

TEST(Serialization, BrokenXmlIsMalformed) {
  EXPECT_EQ(code_of([] { deserialize_snapshot("<TimeMachineSnapshot version=\"1\">"); }),
            ErrorCode::MalformedDocument);
  EXPECT_EQ(code_of([] { deserialize_snapshot(""); }), ErrorCode::MalformedDocument);
  EXPECT_EQ(code_of([] { deserialize_snapshot("<Other/>"); }), ErrorCode::MalformedDocument);
}

TEST(Serialization, FutureVersionIsUnsupported) {
  const auto doc = serialize_snapshot(make_snapshot({}, Timestamp{}, {}));
  EXPECT_EQ(code_of([&] { deserialize_snapshot(replace(doc, "version=\"1\">", "version=\"2\">")); }),
            ErrorCode::UnsupportedVersion);
}

TEST(Timestamp, IsoRoundTrip) {
  const auto t = Timestamp::parse_iso8601("2021-03-04T16:05:09.123Z");
  EXPECT_EQ(t.to_iso8601(), "2021-03-04T16:05:09.123Z");
  EXPECT_EQ(Timestamp::parse_iso8601("2021-03-04T16:05:09Z").unix_ms() % 1000, 0);
  EXPECT_EQ(Timestamp::from_unix_ms(0).to_iso8601(), "1970-01-01T00:00:00.000Z");
  EXPECT_EQ(elapsed_between(t, t + std::chrono::milliseconds(45000)).count(), 45000);
  EXPECT_EQ(code_of([] { Timestamp::parse_iso8601("2021-02-30T00:00:00Z"); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Timestamp::parse_iso8601("yesterday"); }), ErrorCode::InvalidArgument);
}

TEST(ErrorCodes, NamesAreDistinct) {
  std::set<std::string_view> names;
  for (int c = 0; c <= static_cast<int>(ErrorCode::LibraryUnreadable); ++c) {
    names.insert(code_name(static_cast<ErrorCode>(c)));
  }
  EXPECT_EQ(names.size(), static_cast<std::size_t>(ErrorCode::LibraryUnreadable) + 1);
}
