#include "tmm/service.hpp"

#include <atomic>
#include <numbers>
#include <filesystem>
#include <regex>

#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tmm/device_ranker.hpp"
#include "tmm/error.hpp"
#include "tmm/scenario.hpp"

namespace tmm {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

ApiResponse ok(const json& body, int status = 200) { return {status, body.dump()}; }

Vector3 vec_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("request body: ") + e.what());
  }
}

TargetFilter filter_from(const json& j) {
  TargetFilter f;
  if (j.contains("layers")) f.layers = j.at("layers").get<std::vector<std::string>>();
  f.include_hidden = j.value("include_hidden", false);
  return f;
}

PinSpec pin_spec_from(const json& j) {
  if (j.contains("pin")) return parse_pin_spec(j.at("pin").get<std::string>());
  if (!j.contains("ray")) throw Error(ErrorCode::InvalidArgument, "body needs 'ray' or 'pin'");
  const auto& r = j.at("ray");
  return {Ray::toward(vec_from(r.at("origin")), vec_from(r.at("direction"))), filter_from(j)};
}

json session_json(const ApiSession& s) {
  json pins = json::array();
  for (const auto& p : s.session.pins()) pins.push_back(pin_json(p));
  return {{"token", s.token},
          {"pins", pins},
          {"measurements", measurement_report(s.session)},
          {"settings", settings_json(s.session)},
          {"view", view_json(s.view)}};
}

json mesh_payload(const std::string& id, Timestamp ts, std::span<const Mesh> meshes,
                  const RigidTransform& to_world) {
  json positions = json::array();
  json indices = json::array();
  std::uint64_t base = 0;
  for (const auto& m : meshes) {
    for (const auto& v : m.vertices()) {
      const Point3 w = to_world.apply(v);
      positions.push_back(w.x());
      positions.push_back(w.y());
      positions.push_back(w.z());
    }
    for (const auto& t : m.triangles()) {
      for (auto i : t) indices.push_back(base + i);
    }
    base += m.vertex_count();
  }
  return {{"id", id}, {"timestamp", ts.to_iso8601()}, {"positions", positions},
          {"indices", indices}};
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownObject:
      return 404;
    case ErrorCode::CapacityExceeded:
    case ErrorCode::AlreadyLoaded:
    case ErrorCode::PinLocked:
      return 409;
    case ErrorCode::NoHit:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::AssertionFailed:
    case ErrorCode::ObjectOutsideRoom:
      return 422;
    case ErrorCode::StorageFailure:
    case ErrorCode::LibraryUnreadable:
    case ErrorCode::PortUnavailable:
      return 500;
    default:
      return 400;
  }
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

ApiSession& Service::session_for(const std::string& token) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[token];
  if (!slot) {
    slot = std::make_unique<ApiSession>();
    slot->token = token;
  }
  return *slot;
}

ApiResponse Service::handle(std::string_view method_sv, std::string_view path_sv,
                            std::string_view body_sv) {
  static const std::regex kSnapshotLoad(R"(^/api/snapshots/([^/]+)/load$)");
  static const std::regex kLayerMesh(R"(^/api/layers/([^/]+)/mesh$)");
  static const std::regex kSessionPart(R"(^/api/sessions/([^/]+)/(pins|settings|view|measurements)$)");
  static const std::regex kSession(R"(^/api/sessions/([^/]+)$)");

  const std::string method(method_sv);
  const std::string path(path_sv);
  std::smatch m;
  try {
    const json body = parse_body(body_sv);
    auto& reg = workspace_.registry();

    if (path == "/api/snapshots" && method == "GET") {
      json out = json::array();
      for (const auto& d : reg.list_rooms()) out.push_back(descriptor_json(d));
      return ok(out);
    }
    if (path == "/api/snapshots" && method == "POST") {
      std::lock_guard w(writer_mutex_);
      const auto id = reg.save_room(Timestamp::now());
      workspace_.persist();
      for (const auto& d : reg.list_rooms()) {
        if (d.id == id) return ok(descriptor_json(d), 201);
      }
      return ok({{"id", id}}, 201);
    }
    if (std::regex_match(path, m, kSnapshotLoad)) {
      std::lock_guard w(writer_mutex_);
      const std::string id = m[1];
      if (method == "POST") {
        const std::vector<std::string> ids{id};
        const auto d = reg.load_rooms(ids);
        workspace_.persist();
        return ok(descriptor_json(d.front()));
      }
      if (method == "DELETE") {
        reg.unload_room(id);
        workspace_.persist();
        return ok({{"unloaded", reg.resolve_id(id)}});
      }
    }
    if (std::regex_match(path, m, kLayerMesh) && method == "GET") {
      const std::string id = m[1];
      if (is_live_id(id)) {
        const auto meshes = reg.live_meshes();
        auto j = mesh_payload(std::string(kLiveLayerId), reg.live_info().scanned_at, meshes,
                              RigidTransform::identity());
        j["visible"] = reg.live_info().visible;
        return ok(j);
      }
      const auto layer = reg.loaded_layer(id);
      if (!layer) throw Error(ErrorCode::NotFound, "snapshot " + id + " is not loaded");
      auto j = mesh_payload(layer->id, layer->snapshot->timestamp(), layer->snapshot->meshes(),
                            layer->snapshot->anchor_pose());
      j["color"] = {{"name", layer->color.name},
                    {"rgb", json::array({layer->color.r, layer->color.g, layer->color.b})}};
      j["visible"] = layer->visible;
      return ok(j);
    }
    if (path == "/api/raycast" && method == "POST") {
      const auto spec = pin_spec_from(body);
      TargetFilter filter = spec.filter;
      if (body.contains("layers") || body.contains("include_hidden")) filter = filter_from(body);
      const auto hit = ray_cast(reg.targets(filter), spec.ray);
      return ok({{"hit", hit ? hit_json(*hit) : json(nullptr)}});
    }
    if (path == "/api/live" && method == "GET") {
      const auto info = reg.live_info();
      return ok({{"present", info.present},
                 {"visible", info.visible},
                 {"scanned_at", info.scanned_at.to_iso8601()},
                 {"vertex_count", info.vertex_count}});
    }
    if (path == "/api/live/toggle" && method == "POST") {
      std::lock_guard w(writer_mutex_);
      const bool visible = reg.toggle_realtime_mesh();
      workspace_.persist();
      return ok({{"visible", visible}});
    }
    if (path == "/api/live/reset" && method == "POST") {
      std::lock_guard w(writer_mutex_);
      std::optional<sim::SceneSpec> spec;
      if (body.contains("scene_yaml")) spec = sim::parse_scene(body.at("scene_yaml").get<std::string>());
      std::optional<double> noise, edge;
      std::optional<std::uint64_t> seed;
      if (body.contains("noise_sigma")) noise = body.at("noise_sigma").get<double>();
      if (body.contains("edge_length")) edge = body.at("edge_length").get<double>();
      if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
      workspace_.reset(std::move(spec), noise, edge, seed, Timestamp::now());
      workspace_.persist();
      return ok({{"scan_counter", workspace_.live().scan_counter},
                 {"scanned_at", workspace_.live().scanned_at.to_iso8601()}});
    }
    if (path == "/api/live/move" && method == "POST") {
      std::lock_guard w(writer_mutex_);
      const Vector3 t = body.contains("translate") ? vec_from(body.at("translate"))
                                                   : Vector3::Zero();
      const auto object = body.at("object").get<std::string>();
      workspace_.move(object, t, body.value("yaw_deg", 0.0), Timestamp::now());
      workspace_.persist();
      return ok({{"object", object},
                 {"net_displacement_m", workspace_.live().scene.net_displacement(object)}});
    }
    if (path == "/api/sessions" && method == "POST") {
      std::string token;
      {
        std::lock_guard lock(sessions_mutex_);
        token = "s" + std::to_string(next_token_++);
      }
      return ok(session_json(session_for(token)), 201);
    }
    if (std::regex_match(path, m, kSession) && method == "GET") {
      return ok(session_json(session_for(m[1])));
    }
    if (std::regex_match(path, m, kSessionPart)) {
      ApiSession& s = session_for(m[1]);
      const std::string part = m[2];
      std::lock_guard lock(sessions_mutex_);  // one logical client per session
      if (part == "pins" && method == "POST") {
        const auto spec = pin_spec_from(body);
        const auto targets = reg.targets(spec.filter);
        const Pin* pin = nullptr;
        if (body.contains("move")) {
          pin = &s.session.move_pin(body.at("move").get<std::size_t>(), targets, spec.ray,
                                    Timestamp::now());
        } else {
          pin = &s.session.place_pin(targets, spec.ray, Timestamp::now());
        }
        return ok({{"pin", pin_json(*pin)}, {"measurements", measurement_report(s.session)}},
                  201);
      }
      if (part == "pins" && method == "DELETE") {
        s.session.clear_measurements();
        return ok(session_json(s));
      }
      if (part == "settings" && method == "PUT") {
        if (body.contains("mode")) s.session.set_mode(parse_mode(body.at("mode").get<std::string>()));
        if (body.contains("units")) s.session.set_units(parse_units(body.at("units").get<std::string>()));
        if (body.contains("font_size")) s.session.set_font_size(body.at("font_size").get<double>());
        if (body.contains("line_width")) s.session.set_line_width(body.at("line_width").get<double>());
        return ok(session_json(s));
      }
      if (part == "view" && method == "PUT") {
        const Vector3 t = body.contains("translate") ? vec_from(body.at("translate"))
                                                     : Vector3::Zero();
        const double yaw = body.value("yaw_deg", 0.0) * std::numbers::pi / 180.0;
        s.view = manipulate_view(s.view, body.value("scale", 1.0),
                                 RigidTransform::from_yaw(yaw, t));
        return ok(session_json(s));
      }
      if (part == "measurements" && method == "GET") {
        return ok(measurement_report(s.session));
      }
    }
    if (path == "/api/font-scale" && method == "POST") {
      return ok({{"rendered", font_scale(body.at("font_base").get<double>(),
                                         body.at("viewer_distance_m").get<double>())}});
    }
    if (path == "/api/transform/estimate" && method == "POST") {
      std::vector<std::pair<Point3, Point3>> pairs;
      for (const auto& p : body.at("pairs")) pairs.emplace_back(vec_from(p.at(0)), vec_from(p.at(1)));
      const auto t = estimate_rigid(pairs);
      json r = json::array();
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) r.push_back(t.rotation()(i, k));
      }
      return ok({{"rotation", r},
                 {"translation", json::array({t.translation().x(), t.translation().y(),
                                              t.translation().z()})}});
    }
    if (path == "/api/rank" && method == "POST") {
      const auto devices = ranker::parse_devices_csv(body.at("csv").get<std::string>());
      const auto schema = ranker::parse_schema_json(body.at("schema").dump());
      const auto fractions = body.value("pre_normalized", false)
                                 ? ranker::as_fractions(devices, schema)
                                 : ranker::normalize(devices, schema);
      return ok(json::parse(ranker::report_json(ranker::rank(fractions, schema))));
    }
    if (path == "/api/scenarios/run" && method == "POST") {
      const auto script = sim::parse_scenario(body.at("script").get<std::string>());
      sim::RunOptions opts;
      if (body.contains("seed")) opts.seed = body.at("seed").get<std::uint64_t>();
      if (body.contains("noise_sigma")) opts.noise_sigma = body.at("noise_sigma").get<double>();
      if (body.contains("pin_jitter")) opts.pin_jitter = body.at("pin_jitter").get<double>();
      static std::atomic<int> run_counter{0};
      const fs::path dir = fs::temp_directory_path() /
                           ("tmm-scenario-" + std::to_string(::getpid()) + "-" +
                            std::to_string(run_counter++));
      sim::ScenarioReport report;
      {
        LayerRegistry scratch(dir);
        MeasurementSession session;
        report = sim::run_scenario(script, scratch, session, opts);
      }
      std::error_code ec;
      fs::remove_all(dir, ec);
      return ok(json::parse(report.json));
    }
    return ok(error_json(ErrorCode::NotFound, method + " " + path + " is not an endpoint"), 404);
  } catch (const Error& e) {
    return ok(error_json(e.code(), e.what()), http_status_for(e.code()));
  } catch (const json::exception& e) {
    return ok(error_json(ErrorCode::InvalidArgument, e.what()), 400);
  }
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(Service& service) : impl_(new Impl{service, {}, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  const std::string pattern = R"(/api/.*)";
  impl_->server.Get(pattern, handler);
  impl_->server.Post(pattern, handler);
  impl_->server.Put(pattern, handler);
  impl_->server.Delete(pattern, handler);
  impl_->server.Options(pattern, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (!impl_->server.bind_to_port("127.0.0.1", port)) {
    bound = -1;
  }
  if (bound <= 0) {
    throw Error(ErrorCode::PortUnavailable, "cannot bind 127.0.0.1:" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tmm
