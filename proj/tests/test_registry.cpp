#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tmm/error.hpp"
#include "tmm/registry.hpp"

using namespace tmm;
using namespace tmm::testing;

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

Timestamp at(int seconds) { return Timestamp::from_unix_ms(1'614'873'600'000LL + seconds * 1000LL); }

// Saves n snapshots whose live floor sits at distinct heights.
std::vector<std::string> save_n(LayerRegistry& reg, int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    reg.reset_room_position({grid_mesh(2, 1.0, 0.1 * i)}, at(i));
    ids.push_back(reg.save_room(at(i)));
  }
  return ids;
}

}  // namespace

TEST(Colors, FollowTheOverlayCycle) {
  const std::array<std::array<int, 3>, 6> rgb{
      {{0, 255, 255}, {0, 255, 0}, {0, 0, 255}, {255, 128, 0}, {255, 0, 0}, {255, 0, 255}}};
  const std::array<std::string_view, 6> names{"cyan", "lime", "blue", "orange", "red", "magenta"};
  for (std::size_t i = 0; i < 6; ++i) {
    const Rgb c = assign_color(i);
    EXPECT_EQ(c.r, rgb[i][0]);
    EXPECT_EQ(c.g, rgb[i][1]);
    EXPECT_EQ(c.b, rgb[i][2]);
    EXPECT_EQ(c.name, names[i]);
  }
  EXPECT_EQ(code_of([] { assign_color(6); }), ErrorCode::OrdinalOutOfRange);
}

TEST(Registry, EmptyLibraryListsNothing) {
  TempDir dir;
  LayerRegistry reg(dir.path() / "lib");
  EXPECT_TRUE(reg.list_rooms().empty());
  EXPECT_EQ(code_of([&] { reg.save_room(at(0)); }), ErrorCode::NotFound);
}

TEST(Registry, SaveIsIdempotentAndPersistent) {
  TempDir dir;
  std::string id;
  {
    LayerRegistry reg(dir.path());
    reg.reset_room_position({grid_mesh(2, 1.0, 0.0)}, at(0));
    id = reg.save_room(at(5));
    EXPECT_EQ(reg.save_room(at(5)), id);
    EXPECT_EQ(reg.list_rooms().size(), 1u);
    EXPECT_EQ(reg.list_rooms()[0].timestamp, at(5));
  }
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
  LayerRegistry reopened(dir.path());
  ASSERT_EQ(reopened.list_rooms().size(), 1u);
  EXPECT_EQ(reopened.read_snapshot(id).timestamp(), at(5));
  EXPECT_EQ(reopened.resolve_id(id.substr(0, 6)), id);
}

TEST(Registry, ListIsOrderedByTimestamp) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  reg.reset_room_position({grid_mesh(1, 1.0, 0.0)}, at(0));
  reg.save_room(at(30));
  reg.reset_room_position({grid_mesh(1, 1.0, 0.5)}, at(0));
  reg.save_room(at(10));
  const auto rooms = reg.list_rooms();
  ASSERT_EQ(rooms.size(), 2u);
  EXPECT_LT(rooms[0].timestamp, rooms[1].timestamp);
}

TEST(Registry, SeventhLoadFailsAndChangesNothing) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  const auto ids = save_n(reg, 7);
  reg.load_rooms(std::vector<std::string>(ids.begin(), ids.begin() + 6));
  EXPECT_EQ(reg.loaded_layers().size(), 6u);
  EXPECT_EQ(code_of([&] { reg.load_rooms(std::vector<std::string>{ids[6]}); }),
            ErrorCode::CapacityExceeded);
  EXPECT_EQ(reg.loaded_layers().size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(reg.loaded_layers()[i].id, ids[i]);
    EXPECT_EQ(reg.loaded_layers()[i].color, assign_color(i));
  }
}

TEST(Registry, BatchLoadIsAllOrNothing) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  const auto ids = save_n(reg, 7);
  reg.load_rooms(std::vector<std::string>{ids[0], ids[1]});
  EXPECT_EQ(code_of([&] { reg.load_rooms(std::vector<std::string>{ids[2], ids[3], ids[4], ids[5], ids[6]}); }),
            ErrorCode::CapacityExceeded);
  EXPECT_EQ(code_of([&] { reg.load_rooms(std::vector<std::string>{ids[2], "nope"}); }),
            ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { reg.load_rooms(std::vector<std::string>{ids[2], ids[0]}); }),
            ErrorCode::AlreadyLoaded);
  EXPECT_EQ(reg.loaded_layers().size(), 2u);
}

TEST(Registry, UnloadFreesTheColorSlot) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  const auto ids = save_n(reg, 4);
  reg.load_rooms(std::vector<std::string>{ids[0], ids[1], ids[2]});
  reg.unload_room(ids[1]);
  const auto d = reg.load_rooms(std::vector<std::string>{ids[3]});
  EXPECT_EQ(d[0].color->name, "lime");
  EXPECT_EQ(code_of([&] { reg.unload_room(ids[1]); }), ErrorCode::NotFound);
}

TEST(Registry, TargetsRespectVisibilityAndFilters) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  const auto ids = save_n(reg, 2);
  reg.load_rooms(ids);
  auto all = reg.targets({});
  ASSERT_EQ(all.size(), 3u);
  EXPECT_TRUE(all[0]->is_live());
  EXPECT_EQ(all[1]->layer_id(), ids[0]);
  EXPECT_FALSE(reg.toggle_realtime_mesh());
  EXPECT_EQ(reg.targets({}).size(), 2u);
  EXPECT_EQ(reg.targets({{"LIVE"}, true}).size(), 1u);
  reg.set_layer_visible(ids[0], false);
  EXPECT_EQ(reg.targets({}).size(), 1u);
  EXPECT_EQ(reg.targets({{ids[0]}, false}).size(), 0u);
  EXPECT_EQ(reg.targets({{ids[0]}, true}).size(), 1u);
  EXPECT_EQ(code_of([&] { reg.targets({{"feedbeef"}, false}); }), ErrorCode::NotFound);
}

TEST(Registry, CorruptManifestIsUnreadable) {
  TempDir dir;
  {
    std::ofstream(dir.path() / "index.json") << "{not json";
  }
  EXPECT_EQ(code_of([&] { LayerRegistry reg(dir.path()); }), ErrorCode::LibraryUnreadable);
}

TEST(Registry, LoadedSnapshotsAreImmutableAcrossLiveChanges) {
  TempDir dir;
  LayerRegistry reg(dir.path());
  const auto ids = save_n(reg, 1);
  reg.load_rooms(ids);
  const auto before = reg.loaded_layer(ids[0])->snapshot;
  reg.reset_room_position({grid_mesh(3, 2.0, 1.0)}, at(100));
  EXPECT_EQ(*reg.loaded_layer(ids[0])->snapshot, *before);
}
