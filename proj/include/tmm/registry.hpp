#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/mesh.hpp"
#include "tmm/snapshot.hpp"
#include "tmm/spatial_index.hpp"
#include "tmm/timestamp.hpp"

namespace tmm {

inline constexpr std::size_t kMaxLoadedLayers = 6;
inline constexpr std::string_view kManifestName = "index.json";

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  std::string_view name;

  friend bool operator==(const Rgb& a, const Rgb& b) {
    return a.r == b.r && a.g == b.g && a.b == b.b;
  }
};

/// Overlay color for a loaded-layer slot: cyan, lime, blue, orange, red,
/// magenta. Throws OrdinalOutOfRange for ordinal ≥ 6.
Rgb assign_color(std::size_t ordinal);

struct ManifestEntry {
  std::string id;
  Timestamp timestamp;
  std::string file;
  std::size_t vertex_count = 0;
};

struct LoadedLayer {
  std::string id;
  std::shared_ptr<const Snapshot> snapshot;
  std::shared_ptr<const LayerIndex> index;
  std::size_t ordinal = 0;
  Rgb color;
  bool visible = true;
};

struct LayerDescriptor {
  std::string id;
  Timestamp timestamp;
  std::size_t vertex_count = 0;
  bool loaded = false;
  std::optional<std::size_t> ordinal;
  std::optional<Rgb> color;
  bool visible = false;
};

/// Which layers a ray cast may hit. Empty `layers` means every loaded layer
/// plus LIVE; ids may be saved-layer ids or "LIVE"/"live".
struct TargetFilter {
  std::vector<std::string> layers;
  bool include_hidden = false;
};

struct LiveLayerInfo {
  bool present = false;
  bool visible = true;
  Timestamp scanned_at;
  std::size_t vertex_count = 0;
};

/// The "time machine": a library directory of saved snapshots and up to six
/// of them overlaid on the live scan.
///
/// Mutations are serialized behind a writer lock; reads and ray-cast target
/// sets share the immutable layer data current at call time.
class LayerRegistry {
 public:
  /// Opens (creating if needed) a library directory. Throws
  /// LibraryUnreadable if it cannot be created or the manifest is corrupt.
  explicit LayerRegistry(std::filesystem::path library);

  const std::filesystem::path& library_path() const { return library_; }

  /// Captures the live meshes, writes `<id>.tmm.xml` and updates the
  /// manifest. Saving identical content twice returns the existing id.
  std::string save_room(Timestamp now, const RigidTransform& anchor = {});

  /// All-or-nothing: on any error the registry is unchanged.
  std::vector<LayerDescriptor> load_rooms(std::span<const std::string> ids);
  /// Loads one layer into a specific color slot (used to restore a session).
  LayerDescriptor load_room_at(const std::string& id, std::size_t ordinal);
  void unload_room(const std::string& id);
  /// Every saved snapshot ordered by timestamp, with load state.
  std::vector<LayerDescriptor> list_rooms() const;

  bool toggle_realtime_mesh();
  void set_layer_visible(const std::string& id, bool visible);
  void reset_room_position(std::vector<Mesh> fresh_live, Timestamp scanned_at);

  LiveLayerInfo live_info() const;
  std::vector<Mesh> live_meshes() const;
  std::vector<LoadedLayer> loaded_layers() const;
  std::optional<LoadedLayer> loaded_layer(const std::string& id) const;

  /// Reads a saved snapshot from the library (loaded or not).
  Snapshot read_snapshot(const std::string& id) const;

  /// Accepts a full id or a unique prefix; throws NotFound.
  std::string resolve_id(std::string_view id_or_prefix) const;

  /// Ray-cast targets: LIVE first (ordinal 0), then loaded layers by color
  /// slot.
  std::vector<std::shared_ptr<const LayerIndex>> targets(const TargetFilter& filter) const;

 private:
  void read_manifest();
  void write_manifest() const;
  std::string resolve_locked(std::string_view id_or_prefix) const;
  const ManifestEntry* find_entry(const std::string& id) const;
  LoadedLayer read_layer(const ManifestEntry& entry) const;
  std::optional<std::size_t> free_ordinal() const;

  std::filesystem::path library_;
  mutable std::shared_mutex mutex_;

  std::vector<ManifestEntry> manifest_;
  std::vector<LoadedLayer> loaded_;

  std::vector<Mesh> live_meshes_;
  std::shared_ptr<const LayerIndex> live_index_;
  bool live_present_ = false;
  bool live_visible_ = true;
  Timestamp live_scanned_at_;
};

bool is_live_id(std::string_view id);

}  // namespace tmm
