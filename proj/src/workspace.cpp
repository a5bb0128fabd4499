#include "tmm/workspace.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tmm/error.hpp"

namespace tmm {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

json vec_json(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vector3 vec_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json rigid_json(const RigidTransform& t) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(t.rotation()(i, k));
  }
  return {{"rotation", r}, {"translation", vec_json(t.translation())}};
}

RigidTransform rigid_from(const json& j) {
  Matrix3 r;
  const auto& rot = j.at("rotation");
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r(i, k) = rot.at(3 * i + k).get<double>();
  }
  return rigid_from_parts(r, vec_from(j.at("translation")));
}

json scene_json(const sim::SceneSpec& spec) {
  json objects = json::array();
  for (const auto& o : spec.objects) {
    objects.push_back({{"id", o.id}, {"size", vec_json(o.size)}, {"pose", rigid_json(o.pose)}});
  }
  return {{"room", {{"width", spec.room.width},
                    {"depth", spec.room.depth},
                    {"height", spec.room.height}}},
          {"objects", objects}};
}

sim::SceneSpec scene_from(const json& j) {
  sim::SceneSpec spec;
  spec.room.width = j.at("room").at("width").get<double>();
  spec.room.depth = j.at("room").at("depth").get<double>();
  spec.room.height = j.at("room").at("height").get<double>();
  for (const auto& o : j.at("objects")) {
    sim::SceneObject obj;
    obj.id = o.at("id").get<std::string>();
    obj.size = vec_from(o.at("size"));
    obj.pose = rigid_from(o.at("pose"));
    spec.objects.push_back(std::move(obj));
  }
  return spec;
}

std::vector<double> parse_csv_doubles(std::string_view text, std::size_t n,
                                      std::string_view what) {
  std::vector<double> out;
  std::string cell;
  std::istringstream in{std::string(text)};
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument,
                  "bad number '" + cell + "' in " + std::string(what));
    }
  }
  if (out.size() != n) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs " + std::to_string(n) +
                                                " comma-separated numbers");
  }
  return out;
}

}  // namespace

fs::path resolve_library(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(std::string(kLibraryEnv).c_str()); env && *env) return env;
  return std::string(kDefaultLibrary);
}

sim::SceneSpec default_scene() {
  sim::SceneSpec spec;
  spec.room = {4.0, 3.0, 2.5};
  sim::SceneObject container;
  container.id = "container";
  container.size = Vector3::Constant(0.4);
  container.pose = RigidTransform::translation({1.0, 1.5, 0.0});
  spec.objects.push_back(container);
  return spec;
}

Workspace::Workspace(fs::path library) : registry_(std::move(library)) {
  const fs::path p = registry_.library_path() / kWorkspaceFile;
  if (fs::exists(p)) {
    std::ifstream in(p);
    try {
      restore(json::parse(in));
      return;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::LibraryUnreadable, "corrupt " + p.string() + ": " + e.what());
    }
  }
  live_.scene = sim::generate_scene(default_scene());
  rescan(Timestamp::now());
}

void Workspace::restore(const json& doc) {
  const auto& live = doc.at("live");
  live_.scene = sim::generate_scene(scene_from(live.at("scene")));
  live_.edge_length = live.at("edge_length").get<double>();
  live_.noise_sigma = live.at("noise_sigma").get<double>();
  live_.seed = live.at("seed").get<std::uint64_t>();
  live_.scan_counter = live.at("scan_counter").get<std::uint32_t>();
  live_.scanned_at = Timestamp::parse_iso8601(live.at("scanned_at").get<std::string>());
  registry_.reset_room_position(
      sim::sample_scan(live_.scene, {live_.edge_length, live_.noise_sigma,
                                     sim::scan_seed(live_.seed, live_.scan_counter)}),
      live_.scanned_at);
  if (!live.value("visible", true)) registry_.toggle_realtime_mesh();

  for (const auto& l : doc.value("loaded", json::array())) {
    const auto id = l.at("id").get<std::string>();
    try {
      registry_.load_room_at(id, l.at("ordinal").get<std::size_t>());
      if (!l.value("visible", true)) registry_.set_layer_visible(id, false);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFound) throw;
    }
  }

  if (doc.contains("session")) {
    const auto& s = doc.at("session");
    session_.set_mode(parse_mode(s.value("mode", std::string("Distance"))));
    session_.set_units(parse_units(s.value("units", std::string("m"))));
    session_.set_font_size(s.value("font_size", kDefaultFontBase));
    session_.set_line_width(s.value("line_width", kDefaultLineWidth));
    for (const auto& p : s.value("pins", json::array())) {
      Pin pin;
      pin.position = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("z").get<double>()};
      pin.source_layer = p.at("layer").get<std::string>();
      pin.source_time = Timestamp::parse_iso8601(p.at("time").get<std::string>());
      pin.movable = p.value("movable", true);
      session_.add_pin(std::move(pin));
    }
  }
  if (doc.contains("view")) {
    view_.scale = doc.at("view").at("scale").get<double>();
    view_.view_rigid = rigid_from(doc.at("view").at("rigid"));
  }
}

void Workspace::persist() const {
  std::lock_guard lock(mutex_);
  const auto info = registry_.live_info();
  json loaded = json::array();
  for (const auto& l : registry_.loaded_layers()) {
    loaded.push_back({{"id", l.id}, {"ordinal", l.ordinal}, {"visible", l.visible}});
  }
  json pins = json::array();
  for (const auto& p : session_.pins()) pins.push_back(pin_json(p));
  const json doc = {
      {"version", 1},
      {"live", {{"scene", scene_json(live_.scene.spec())},
                {"edge_length", live_.edge_length},
                {"noise_sigma", live_.noise_sigma},
                {"seed", live_.seed},
                {"scan_counter", live_.scan_counter},
                {"scanned_at", live_.scanned_at.to_iso8601()},
                {"visible", info.visible}}},
      {"loaded", loaded},
      {"session", {{"mode", mode_name(session_.mode())},
                   {"units", units_symbol(session_.units())},
                   {"font_size", session_.font_base()},
                   {"line_width", session_.line_width()},
                   {"pins", pins}}},
      {"view", {{"scale", view_.scale}, {"rigid", rigid_json(view_.view_rigid)}}},
  };
  const fs::path p = registry_.library_path() / kWorkspaceFile;
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out << doc.dump(2) << "\n";
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot write " + p.string());
}

void Workspace::rescan(Timestamp now) {
  live_.scanned_at = now;
  registry_.reset_room_position(
      sim::sample_scan(live_.scene, {live_.edge_length, live_.noise_sigma,
                                     sim::scan_seed(live_.seed, live_.scan_counter)}),
      now);
}

void Workspace::reset(std::optional<sim::SceneSpec> spec, std::optional<double> noise_sigma,
                      std::optional<double> edge_length, std::optional<std::uint64_t> seed,
                      Timestamp now) {
  std::lock_guard lock(mutex_);
  LiveSource next = live_;
  if (spec) next.scene = sim::generate_scene(std::move(*spec));
  if (noise_sigma) next.noise_sigma = *noise_sigma;
  if (edge_length) next.edge_length = *edge_length;
  if (seed) {
    next.seed = *seed;
    next.scan_counter = 0;
  } else {
    ++next.scan_counter;
  }
  live_ = std::move(next);
  rescan(now);
}

void Workspace::move(const std::string& object, const Vector3& translate, double yaw_deg,
                     Timestamp now) {
  std::lock_guard lock(mutex_);
  const auto motion =
      sim::object_motion(live_.scene.object(object), translate, yaw_deg * kDegToRad);
  live_.scene = sim::move_object(live_.scene, object, motion);
  ++live_.scan_counter;
  rescan(now);
}

void Workspace::adopt_scenario(const sim::ScenarioScript& script,
                               const sim::ScenarioReport& report,
                               const MeasurementSession& session, std::uint64_t seed,
                               double noise_sigma) {
  std::lock_guard lock(mutex_);
  live_.scene = report.final_scene;
  live_.edge_length = script.edge_length;
  live_.noise_sigma = noise_sigma;
  live_.seed = seed;
  live_.scan_counter = report.scan_counter;
  live_.scanned_at = registry_.live_info().scanned_at;
  session_ = session;
}

PinSpec parse_pin_spec(std::string_view text) {
  if (text.starts_with("ray:")) {
    const auto body = text.substr(4);
    const auto slash = body.find('/');
    if (slash == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "ray pin needs 'ox,oy,oz/dx,dy,dz'");
    }
    const auto o = parse_csv_doubles(body.substr(0, slash), 3, "ray origin");
    const auto d = parse_csv_doubles(body.substr(slash + 1), 3, "ray direction");
    return {Ray::toward({o[0], o[1], o[2]}, {d[0], d[1], d[2]}), {}};
  }
  const auto at = text.find('@');
  if (at == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "pin spec must be 'x,y,z@layer' or 'ray:ox,oy,oz/dx,dy,dz'");
  }
  const auto p = parse_csv_doubles(text.substr(0, at), 3, "pin point");
  const std::string layer(text.substr(at + 1));
  if (layer.empty()) throw Error(ErrorCode::InvalidArgument, "pin spec has an empty layer");
  const Point3 origin(p[0], p[1], p[2] + kPointProbeHeight);
  return {Ray{origin, -Vector3::UnitZ()}, TargetFilter{{layer}, true}};
}

json pin_json(const Pin& p) {
  return {{"x", p.position.x()},
          {"y", p.position.y()},
          {"z", p.position.z()},
          {"layer", p.source_layer},
          {"time", p.source_time.to_iso8601()},
          {"movable", p.movable}};
}

json segment_json(const MeasurementSession& s, const MeasurementResult& r) {
  const auto pins = s.pins();
  json from = pin_json(pins[r.from]);
  json to = pin_json(pins[r.to]);
  from.erase("movable");
  to.erase("movable");
  return {{"from", from},
          {"to", to},
          {"distance_m", r.distance_m},
          {"distance_display", s.display(r)},
          {"elapsed_s", static_cast<double>(r.elapsed.count()) / 1000.0}};
}

json measurement_report(const MeasurementSession& s) {
  json out = json::array();
  for (const auto& seg : s.segments()) out.push_back(segment_json(s, seg));
  return out;
}

json settings_json(const MeasurementSession& s) {
  return {{"units", units_symbol(s.units())},
          {"mode", mode_name(s.mode())},
          {"font_size", s.font_base()},
          {"line_width", s.line_width()}};
}

json view_json(const ViewState& v) {
  return {{"scale", v.scale}, {"rigid", rigid_json(v.view_rigid)}};
}

json descriptor_json(const LayerDescriptor& d) {
  json j = {{"id", d.id},
            {"timestamp", d.timestamp.to_iso8601()},
            {"vertex_count", d.vertex_count},
            {"loaded", d.loaded},
            {"visible", d.visible}};
  if (d.color) {
    j["color"] = {{"name", d.color->name},
                  {"rgb", json::array({d.color->r, d.color->g, d.color->b})}};
    j["ordinal"] = *d.ordinal;
  }
  return j;
}

json hit_json(const Hit& h) {
  return {{"point", vec_json(h.point)},
          {"ray_distance", h.ray_distance},
          {"layer", h.layer_id},
          {"timestamp", h.timestamp.to_iso8601()},
          {"mesh_index", h.mesh_index},
          {"triangle_index", h.triangle_index}};
}

json error_json(ErrorCode code, std::string_view message) {
  return {{"error", {{"code", code_name(code)}, {"message", message}}}};
}

}  // namespace tmm
