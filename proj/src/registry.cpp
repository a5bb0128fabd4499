#include "tmm/registry.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tmm/error.hpp"

namespace tmm {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::array<Rgb, kMaxLoadedLayers> kPalette{{
    {0, 255, 255, "cyan"},
    {0, 255, 0, "lime"},
    {0, 0, 255, "blue"},
    {255, 128, 0, "orange"},
    {255, 0, 0, "red"},
    {255, 0, 255, "magenta"},
}};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, std::string_view bytes) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot rename into " + p.string());
}

LayerDescriptor describe(const ManifestEntry& e, const LoadedLayer* layer) {
  LayerDescriptor d;
  d.id = e.id;
  d.timestamp = e.timestamp;
  d.vertex_count = e.vertex_count;
  if (layer) {
    d.loaded = true;
    d.ordinal = layer->ordinal;
    d.color = layer->color;
    d.visible = layer->visible;
  }
  return d;
}

}  // namespace

Rgb assign_color(std::size_t ordinal) {
  if (ordinal >= kPalette.size()) {
    throw Error(ErrorCode::OrdinalOutOfRange,
                "color ordinal " + std::to_string(ordinal) + " exceeds the six overlay slots");
  }
  return kPalette[ordinal];
}

bool is_live_id(std::string_view id) { return id == kLiveLayerId || id == "live"; }

LayerRegistry::LayerRegistry(fs::path library) : library_(std::move(library)) {
  std::error_code ec;
  fs::create_directories(library_, ec);
  if (ec || !fs::is_directory(library_)) {
    throw Error(ErrorCode::LibraryUnreadable, "cannot open library " + library_.string());
  }
  read_manifest();
}

void LayerRegistry::read_manifest() {
  const fs::path p = library_ / kManifestName;
  if (!fs::exists(p)) return;
  try {
    const json doc = json::parse(read_file(p));
    for (const auto& item : doc.at("snapshots")) {
      manifest_.push_back({item.at("id").get<std::string>(),
                           Timestamp::parse_iso8601(item.at("timestamp").get<std::string>()),
                           item.at("file").get<std::string>(),
                           item.value("vertex_count", std::size_t{0})});
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::LibraryUnreadable,
                "corrupt manifest " + p.string() + ": " + e.what());
  }
}

void LayerRegistry::write_manifest() const {
  json items = json::array();
  for (const auto& e : manifest_) {
    items.push_back({{"id", e.id},
                     {"timestamp", e.timestamp.to_iso8601()},
                     {"file", e.file},
                     {"vertex_count", e.vertex_count}});
  }
  const json doc = {{"version", 1}, {"snapshots", items}};
  write_file_atomic(library_ / kManifestName, doc.dump(2) + "\n");
}

const ManifestEntry* LayerRegistry::find_entry(const std::string& id) const {
  for (const auto& e : manifest_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::string LayerRegistry::resolve_locked(std::string_view id_or_prefix) const {
  const ManifestEntry* match = nullptr;
  for (const auto& e : manifest_) {
    if (e.id == id_or_prefix) return e.id;
    if (!id_or_prefix.empty() && e.id.starts_with(id_or_prefix)) {
      if (match) {
        throw Error(ErrorCode::NotFound,
                    "ambiguous snapshot id prefix '" + std::string(id_or_prefix) + "'");
      }
      match = &e;
    }
  }
  if (!match) {
    throw Error(ErrorCode::NotFound, "no snapshot '" + std::string(id_or_prefix) + "'");
  }
  return match->id;
}

std::string LayerRegistry::resolve_id(std::string_view id_or_prefix) const {
  std::shared_lock lock(mutex_);
  return resolve_locked(id_or_prefix);
}

std::string LayerRegistry::save_room(Timestamp now, const RigidTransform& anchor) {
  std::unique_lock lock(mutex_);
  if (!live_present_) {
    throw Error(ErrorCode::NotFound, "no live layer to save; reset the room first");
  }
  const Snapshot snap = capture_snapshot(live_meshes_, anchor, now);
  const std::string doc = serialize_snapshot(snap);

  // Content-addressed id; a different document under the same hash gets a
  // numeric suffix.
  std::string id = snap.id();
  for (int suffix = 1;; ++suffix) {
    const ManifestEntry* existing = find_entry(id);
    if (!existing) break;
    std::string on_disk;
    try {
      on_disk = read_file(library_ / existing->file);
    } catch (const Error&) {
      on_disk.clear();
    }
    if (on_disk == doc) return id;
    id = snap.id() + "-" + std::to_string(suffix);
  }

  const std::string file = id + std::string(kSnapshotExtension);
  write_file_atomic(library_ / file, doc);

  auto entries = manifest_;
  entries.push_back({id, snap.timestamp(), file, snap.vertex_count()});
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  std::swap(manifest_, entries);
  try {
    write_manifest();
  } catch (...) {
    std::swap(manifest_, entries);
    throw;
  }
  return id;
}

LoadedLayer LayerRegistry::read_layer(const ManifestEntry& entry) const {
  auto snap = std::make_shared<const Snapshot>(
      deserialize_snapshot(read_file(library_ / entry.file)));
  LoadedLayer layer;
  layer.id = entry.id;
  layer.index = std::make_shared<const LayerIndex>(
      build_layer(entry.id, snap->timestamp(), snap->meshes(), snap->anchor_pose()));
  layer.snapshot = std::move(snap);
  return layer;
}

std::optional<std::size_t> LayerRegistry::free_ordinal() const {
  for (std::size_t i = 0; i < kMaxLoadedLayers; ++i) {
    const bool used = std::any_of(loaded_.begin(), loaded_.end(),
                                  [i](const auto& l) { return l.ordinal == i; });
    if (!used) return i;
  }
  return std::nullopt;
}

std::vector<LayerDescriptor> LayerRegistry::load_rooms(std::span<const std::string> ids) {
  std::unique_lock lock(mutex_);
  std::vector<std::string> resolved;
  for (const auto& raw : ids) {
    const std::string id = resolve_locked(raw);
    const bool dup = std::find(resolved.begin(), resolved.end(), id) != resolved.end();
    const bool already = std::any_of(loaded_.begin(), loaded_.end(),
                                      [&](const auto& l) { return l.id == id; });
    if (dup || already) {
      throw Error(ErrorCode::AlreadyLoaded, "snapshot " + id + " is already loaded");
    }
    resolved.push_back(id);
  }
  if (loaded_.size() + resolved.size() > kMaxLoadedLayers) {
    throw Error(ErrorCode::CapacityExceeded,
                "loading " + std::to_string(resolved.size()) + " layer(s) would exceed " +
                    std::to_string(kMaxLoadedLayers) + " overlays (" +
                    std::to_string(loaded_.size()) + " loaded)");
  }

  std::vector<LoadedLayer> fresh;
  for (const auto& id : resolved) fresh.push_back(read_layer(*find_entry(id)));

  std::vector<LayerDescriptor> out;
  for (auto& layer : fresh) {
    layer.ordinal = *free_ordinal();
    layer.color = assign_color(layer.ordinal);
    loaded_.push_back(layer);
    out.push_back(describe(*find_entry(layer.id), &loaded_.back()));
  }
  return out;
}

LayerDescriptor LayerRegistry::load_room_at(const std::string& raw_id, std::size_t ordinal) {
  std::unique_lock lock(mutex_);
  const std::string id = resolve_locked(raw_id);
  const Rgb color = assign_color(ordinal);
  for (const auto& l : loaded_) {
    if (l.id == id) throw Error(ErrorCode::AlreadyLoaded, "snapshot " + id + " is already loaded");
    if (l.ordinal == ordinal) {
      throw Error(ErrorCode::CapacityExceeded,
                  "color slot " + std::to_string(ordinal) + " is occupied");
    }
  }
  LoadedLayer layer = read_layer(*find_entry(id));
  layer.ordinal = ordinal;
  layer.color = color;
  loaded_.push_back(std::move(layer));
  return describe(*find_entry(id), &loaded_.back());
}

void LayerRegistry::unload_room(const std::string& raw_id) {
  std::unique_lock lock(mutex_);
  const std::string id = resolve_locked(raw_id);
  const auto it =
      std::find_if(loaded_.begin(), loaded_.end(), [&](const auto& l) { return l.id == id; });
  if (it == loaded_.end()) throw Error(ErrorCode::NotFound, "snapshot " + id + " is not loaded");
  loaded_.erase(it);
}

std::vector<LayerDescriptor> LayerRegistry::list_rooms() const {
  std::shared_lock lock(mutex_);
  std::vector<LayerDescriptor> out;
  for (const auto& e : manifest_) {
    const auto it = std::find_if(loaded_.begin(), loaded_.end(),
                                 [&](const auto& l) { return l.id == e.id; });
    out.push_back(describe(e, it == loaded_.end() ? nullptr : &*it));
  }
  return out;
}

bool LayerRegistry::toggle_realtime_mesh() {
  std::unique_lock lock(mutex_);
  live_visible_ = !live_visible_;
  return live_visible_;
}

void LayerRegistry::set_layer_visible(const std::string& raw_id, bool visible) {
  std::unique_lock lock(mutex_);
  if (is_live_id(raw_id)) {
    live_visible_ = visible;
    return;
  }
  const std::string id = resolve_locked(raw_id);
  for (auto& l : loaded_) {
    if (l.id == id) {
      l.visible = visible;
      return;
    }
  }
  throw Error(ErrorCode::NotFound, "snapshot " + id + " is not loaded");
}

void LayerRegistry::reset_room_position(std::vector<Mesh> fresh_live, Timestamp scanned_at) {
  auto index = std::make_shared<const LayerIndex>(build_live_index(fresh_live, scanned_at));
  std::unique_lock lock(mutex_);
  live_meshes_ = std::move(fresh_live);
  live_index_ = std::move(index);
  live_present_ = true;
  live_scanned_at_ = scanned_at;
}

LiveLayerInfo LayerRegistry::live_info() const {
  std::shared_lock lock(mutex_);
  LiveLayerInfo info;
  info.present = live_present_;
  info.visible = live_visible_;
  info.scanned_at = live_scanned_at_;
  for (const auto& m : live_meshes_) info.vertex_count += m.vertex_count();
  return info;
}

std::vector<Mesh> LayerRegistry::live_meshes() const {
  std::shared_lock lock(mutex_);
  return live_meshes_;
}

std::vector<LoadedLayer> LayerRegistry::loaded_layers() const {
  std::shared_lock lock(mutex_);
  auto out = loaded_;
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
  return out;
}

std::optional<LoadedLayer> LayerRegistry::loaded_layer(const std::string& raw_id) const {
  std::shared_lock lock(mutex_);
  const std::string id = resolve_locked(raw_id);
  for (const auto& l : loaded_) {
    if (l.id == id) return l;
  }
  return std::nullopt;
}

Snapshot LayerRegistry::read_snapshot(const std::string& raw_id) const {
  std::shared_lock lock(mutex_);
  const std::string id = resolve_locked(raw_id);
  return deserialize_snapshot(read_file(library_ / find_entry(id)->file));
}

std::vector<std::shared_ptr<const LayerIndex>> LayerRegistry::targets(
    const TargetFilter& filter) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> wanted;
  bool want_live = filter.layers.empty();
  for (const auto& raw : filter.layers) {
    if (is_live_id(raw)) {
      want_live = true;
    } else {
      wanted.push_back(resolve_locked(raw));
    }
  }

  std::vector<std::shared_ptr<const LayerIndex>> out;
  if (want_live && live_present_ && (live_visible_ || filter.include_hidden)) {
    out.push_back(live_index_);
  }
  auto sorted = loaded_;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
  for (const auto& l : sorted) {
    const bool selected = filter.layers.empty() ||
                          std::find(wanted.begin(), wanted.end(), l.id) != wanted.end();
    if (selected && (l.visible || filter.include_hidden)) out.push_back(l.index);
  }
  for (const auto& id : wanted) {
    const bool is_loaded = std::any_of(sorted.begin(), sorted.end(),
                                       [&](const auto& l) { return l.id == id; });
    if (!is_loaded) throw Error(ErrorCode::NotFound, "snapshot " + id + " is not loaded");
  }
  return out;
}

}  // namespace tmm
