#include "tmm/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "tmm/error.hpp"

namespace tmm::sim {

using json = nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void script_error(const std::string& what) {
  throw Error(ErrorCode::ScriptError, what);
}

Vector3 as_vec3(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsSequence() || n.size() != 3) script_error(ctx + ": expected [x, y, z]");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

template <typename T>
T get_or(const YAML::Node& n, const char* key, T fallback) {
  return n[key] ? n[key].as<T>() : fallback;
}

std::string require_str(const YAML::Node& n, const char* key, const std::string& ctx) {
  if (!n[key]) script_error(ctx + ": missing '" + key + "'");
  return n[key].as<std::string>();
}

SceneSpec scene_from_node(const YAML::Node& node) {
  SceneSpec spec;
  if (!node) return spec;
  if (const auto room = node["room"]) {
    spec.room.width = get_or(room, "width", spec.room.width);
    spec.room.depth = get_or(room, "depth", spec.room.depth);
    spec.room.height = get_or(room, "height", spec.room.height);
  }
  for (const auto& o : node["objects"]) {
    SceneObject obj;
    obj.id = require_str(o, "id", "scene object");
    if (o["size"]) obj.size = as_vec3(o["size"], "object size");
    const Vector3 pos = o["position"] ? as_vec3(o["position"], "object position")
                                      : Vector3::Zero();
    obj.pose = RigidTransform::from_yaw(get_or(o, "yaw_deg", 0.0) * kDegToRad, pos);
    spec.objects.push_back(std::move(obj));
  }
  return spec;
}

std::vector<std::string> as_labels(const YAML::Node& n) {
  std::vector<std::string> out;
  if (n.IsSequence()) {
    for (const auto& item : n) out.push_back(item.as<std::string>());
  } else {
    out.push_back(n.as<std::string>());
  }
  return out;
}

ScenarioStep parse_step(const YAML::Node& node, std::size_t index) {
  const std::string ctx = "step " + std::to_string(index);
  if (!node.IsMap()) script_error(ctx + ": expected a mapping");
  ScenarioStep step;
  std::string kind;
  YAML::Node body;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (key == "tag") {
      step.tag = kv.second.as<std::string>();
    } else if (kind.empty()) {
      kind = key;
      body = kv.second;
    } else {
      script_error(ctx + ": more than one step kind ('" + kind + "', '" + key + "')");
    }
  }
  if (kind.empty()) script_error(ctx + ": empty step");

  if (kind == "save") {
    step.kind = StepKind::Save;
    step.label = body.as<std::string>();
  } else if (kind == "wait") {
    step.kind = StepKind::Wait;
    step.seconds = body.as<double>();
    if (step.seconds < 0) script_error(ctx + ": negative wait");
  } else if (kind == "move") {
    step.kind = StepKind::Move;
    step.object = require_str(body, "object", ctx);
    if (body["translate"]) step.translate = as_vec3(body["translate"], ctx);
    step.yaw_deg = get_or(body, "yaw_deg", 0.0);
  } else if (kind == "rescan") {
    step.kind = StepKind::Rescan;
  } else if (kind == "load") {
    step.kind = StepKind::Load;
    step.layers = as_labels(body);
  } else if (kind == "unload") {
    step.kind = StepKind::Unload;
    step.label = body.as<std::string>();
  } else if (kind == "toggle_live") {
    step.kind = StepKind::ToggleLive;
  } else if (kind == "pin") {
    step.kind = StepKind::Pin;
    step.object = require_str(body, "object", ctx);
    step.feature = get_or<std::string>(body, "feature", "top-center");
    step.layer = require_str(body, "layer", ctx);
  } else if (kind == "measure") {
    step.kind = StepKind::Measure;
    if (body.IsScalar()) {
      step.label = body.as<std::string>();
    } else {
      step.label = require_str(body, "label", ctx);
      if (body["from"]) step.from = body["from"].as<std::size_t>();
      if (body["to"]) step.to = body["to"].as<std::size_t>();
    }
  } else if (kind == "clear") {
    step.kind = StepKind::Clear;
  } else if (kind == "view") {
    step.kind = StepKind::View;
    step.scale = get_or(body, "scale", 1.0);
    step.yaw_deg = get_or(body, "yaw_deg", 0.0);
    if (body["translate"]) step.translate = as_vec3(body["translate"], ctx);
  } else if (kind == "trail") {
    step.kind = StepKind::Trail;
    step.object = require_str(body, "object", ctx);
    step.feature = get_or<std::string>(body, "feature", "top-center");
    if (!body["layers"]) script_error(ctx + ": trail needs 'layers'");
    step.layers = as_labels(body["layers"]);
  } else if (kind == "settings") {
    step.kind = StepKind::Settings;
    if (body["units"]) step.units = body["units"].as<std::string>();
    if (body["mode"]) step.mode = body["mode"].as<std::string>();
    if (body["font_size"]) step.font_size = body["font_size"].as<double>();
    if (body["line_width"]) step.line_width = body["line_width"].as<double>();
  } else if (kind == "assert") {
    step.kind = StepKind::Assert;
    step.measurement = require_str(body, "measurement", ctx);
    if (!body["expected"]) script_error(ctx + ": assert needs 'expected'");
    step.expected = body["expected"].as<double>();
    step.tolerance = get_or(body, "tolerance", 0.0);
    step.relative_tolerance = get_or(body, "relative_tolerance", 0.0);
  } else {
    script_error(ctx + ": unknown step kind '" + kind + "'");
  }
  return step;
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

json color_json(const Rgb& c) {
  return {{"name", c.name}, {"rgb", json::array({c.r, c.g, c.b})}};
}

json pin_json(const PinRecord& p) {
  json j = {{"x", p.position.x()},
            {"y", p.position.y()},
            {"z", p.position.z()},
            {"layer", p.layer_label},
            {"layer_id", p.layer_id},
            {"time", p.time.to_iso8601()}};
  if (p.ground_truth) j["ground_truth"] = point_json(*p.ground_truth);
  return j;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, counter};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Mutable state of one scenario execution.
class Runner {
 public:
  Runner(const ScenarioScript& script, LayerRegistry& registry, MeasurementSession& session,
         const RunOptions& options)
      : script_(script),
        registry_(registry),
        session_(session),
        options_(options),
        seed_(options.seed.value_or(script.seed)),
        noise_(options.noise_sigma.value_or(script.noise_sigma)),
        jitter_(options.pin_jitter.value_or(script.pin_jitter)),
        now_(script.start_time),
        scene_(generate_scene(script.scene)),
        pin_rng_(derive_seed(seed_, 0x9147, 0)) {}

  ScenarioReport run();

 private:
  void rescan();
  std::string layer_id_for(const std::string& label) const;
  const Scene& scene_for(const std::string& label) const;
  PinRecord cast_pin(const std::string& object, const std::string& feature_name,
                     const std::string& label);
  json exec(const ScenarioStep& step);

  const ScenarioScript& script_;
  LayerRegistry& registry_;
  MeasurementSession& session_;
  RunOptions options_;
  std::uint64_t seed_;
  double noise_;
  double jitter_;
  Timestamp now_;
  Scene scene_;
  std::mt19937_64 pin_rng_;
  std::uint32_t scan_counter_ = 0;
  ViewState view_;

  std::map<std::string, std::string> label_to_id_;
  std::map<std::string, Scene> epoch_scene_;
  std::vector<PinRecord> pins_;
  ScenarioReport report_;
};

void Runner::rescan() {
  ScanConfig cfg{script_.edge_length, noise_, scan_seed(seed_, scan_counter_++)};
  registry_.reset_room_position(sample_scan(scene_, cfg), now_);
}

std::string Runner::layer_id_for(const std::string& label) const {
  if (is_live_id(label)) return std::string(kLiveLayerId);
  const auto it = label_to_id_.find(label);
  if (it == label_to_id_.end()) script_error("unknown layer label '" + label + "'");
  return it->second;
}

const Scene& Runner::scene_for(const std::string& label) const {
  if (is_live_id(label)) return scene_;
  const auto it = epoch_scene_.find(label);
  if (it == epoch_scene_.end()) script_error("unknown layer label '" + label + "'");
  return it->second;
}

PinRecord Runner::cast_pin(const std::string& object, const std::string& feature_name,
                           const std::string& label) {
  const std::string id = layer_id_for(label);
  const Feature f = feature(scene_for(label).object(object), feature_name);
  const Ray ray = probe_ray(f, jitter_, pin_rng_);
  const auto targets = registry_.targets(TargetFilter{{id}, true});
  const auto hit = ray_cast(targets, ray);
  if (!hit) {
    throw Error(ErrorCode::NoHit, "pin on " + object + "." + feature_name + " in layer '" +
                                      label + "' missed");
  }
  const Pin pin = pin_from_hit(*hit, now_);
  return {pin.position, label, pin.source_layer, pin.source_time, f.point};
}

json Runner::exec(const ScenarioStep& step) {
  json r;
  switch (step.kind) {
    case StepKind::Save: {
      const std::string id = registry_.save_room(now_);
      label_to_id_[step.label] = id;
      epoch_scene_.insert_or_assign(step.label, scene_);
      report_.epochs.push_back({step.label, id, now_, std::nullopt, std::nullopt});
      r = {{"label", step.label}, {"id", id}, {"timestamp", now_.to_iso8601()}};
      break;
    }
    case StepKind::Wait:
      now_ = now_ + std::chrono::milliseconds(std::llround(step.seconds * 1000.0));
      r = {{"seconds", step.seconds}};
      break;
    case StepKind::Move: {
      const auto motion =
          object_motion(scene_.object(step.object), step.translate, step.yaw_deg * kDegToRad);
      scene_ = move_object(std::move(scene_), step.object, motion);
      rescan();
      r = {{"object", step.object},
           {"displacement_m", scene_.moves().back().displacement},
           {"net_displacement_m", scene_.net_displacement(step.object)}};
      break;
    }
    case StepKind::Rescan:
      rescan();
      r = {{"scan", scan_counter_ - 1}};
      break;
    case StepKind::Load: {
      std::vector<std::string> ids;
      for (const auto& label : step.layers) ids.push_back(layer_id_for(label));
      const auto loaded = registry_.load_rooms(ids);
      json layers = json::array();
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        for (auto& e : report_.epochs) {
          if (e.id == loaded[i].id) {
            e.ordinal = loaded[i].ordinal;
            e.color = loaded[i].color;
          }
        }
        layers.push_back({{"label", step.layers[i]},
                          {"id", loaded[i].id},
                          {"timestamp", loaded[i].timestamp.to_iso8601()},
                          {"color", color_json(*loaded[i].color)}});
      }
      r = {{"layers", layers}};
      break;
    }
    case StepKind::Unload:
      registry_.unload_room(layer_id_for(step.label));
      r = {{"label", step.label}};
      break;
    case StepKind::ToggleLive:
      r = {{"live_visible", registry_.toggle_realtime_mesh()}};
      break;
    case StepKind::Pin: {
      PinRecord pin = cast_pin(step.object, step.feature, step.layer);
      Pin p;
      p.position = pin.position;
      p.source_layer = pin.layer_id;
      p.source_time = pin.time;
      session_.add_pin(p);
      pins_.push_back(pin);
      r = pin_json(pin);
      r["index"] = pins_.size() - 1;
      break;
    }
    case StepKind::Measure: {
      if (pins_.size() < 2 && !(step.from && step.to)) {
        script_error("measure '" + step.label + "' needs two pins");
      }
      const std::size_t a = step.from.value_or(pins_.size() - 2);
      const std::size_t b = step.to.value_or(pins_.size() - 1);
      if (a >= pins_.size() || b >= pins_.size()) {
        script_error("measure '" + step.label + "' references a missing pin");
      }
      const auto pins = session_.pins();
      const auto m = measure_between(pins[a], pins[b]);
      MeasurementRecord rec;
      rec.label = step.label;
      rec.distance_m = m.distance_m;
      rec.elapsed_s = static_cast<double>(m.elapsed.count()) / 1000.0;
      rec.display = session_.display(m);
      rec.from = pins_[a];
      rec.to = pins_[b];
      if (pins_[a].ground_truth && pins_[b].ground_truth) {
        rec.ground_truth_m = (*pins_[a].ground_truth - *pins_[b].ground_truth).norm();
      }
      r = {{"label", rec.label},
           {"from", pin_json(rec.from)},
           {"to", pin_json(rec.to)},
           {"distance_m", rec.distance_m},
           {"distance_display", rec.display},
           {"elapsed_s", rec.elapsed_s}};
      if (rec.ground_truth_m) {
        r["ground_truth_m"] = *rec.ground_truth_m;
        r["error_m"] = rec.distance_m - *rec.ground_truth_m;
      }
      report_.measurements.push_back(std::move(rec));
      break;
    }
    case StepKind::Clear:
      session_.clear_measurements();
      pins_.clear();
      r = json::object();
      break;
    case StepKind::View: {
      std::vector<double> before;
      for (const auto& s : session_.segments()) before.push_back(s.distance_m);
      view_ = manipulate_view(view_, step.scale,
                              RigidTransform::from_yaw(step.yaw_deg * kDegToRad, step.translate));
      bool unchanged = before.size() == session_.segments().size();
      for (std::size_t i = 0; unchanged && i < before.size(); ++i) {
        unchanged = before[i] == session_.segments()[i].distance_m;
      }
      r = {{"scale", view_.scale}, {"measurements_unchanged", unchanged}};
      break;
    }
    case StepKind::Trail: {
      std::vector<Point3> world;
      json points = json::array();
      for (const auto& label : step.layers) {
        const PinRecord p = cast_pin(step.object, step.feature, label);
        world.push_back(p.position);
        points.push_back(pin_json(p));
      }
      report_.trail_world = world;
      report_.trail_display = trail_in_view(view_, world);
      json display = json::array();
      for (const auto& p : report_.trail_display) display.push_back(point_json(p));
      double length = 0.0;
      for (std::size_t i = 1; i < world.size(); ++i) length += (world[i] - world[i - 1]).norm();
      r = {{"object", step.object},
           {"points", points},
           {"display_polyline", display},
           {"length_m", length}};
      break;
    }
    case StepKind::Settings:
      if (step.mode) session_.set_mode(parse_mode(*step.mode));
      if (step.units) session_.set_units(parse_units(*step.units));
      if (step.font_size) session_.set_font_size(*step.font_size);
      if (step.line_width) session_.set_line_width(*step.line_width);
      r = {{"units", units_symbol(session_.units())},
           {"mode", mode_name(session_.mode())},
           {"font_size", session_.font_base()},
           {"line_width", session_.line_width()}};
      break;
    case StepKind::Assert: {
      const auto* m = report_.measurement(step.measurement);
      if (!m) script_error("assert references unknown measurement '" + step.measurement + "'");
      AssertionRecord a;
      a.measurement = step.measurement;
      a.expected = step.expected;
      a.tolerance = step.tolerance + step.relative_tolerance * std::abs(step.expected);
      a.measured = m->distance_m;
      a.passed = std::abs(a.measured - a.expected) <= a.tolerance;
      report_.assertions.push_back(a);
      report_.passed = report_.passed && a.passed;
      r = {{"measurement", a.measurement},
           {"expected", a.expected},
           {"tolerance", a.tolerance},
           {"measured", a.measured},
           {"passed", a.passed}};
      if (!a.passed && options_.fail_fast) {
        std::ostringstream msg;
        msg << "measurement '" << a.measurement << "' = " << a.measured << " m, expected "
            << a.expected << " ± " << a.tolerance << " m";
        throw Error(ErrorCode::AssertionFailed, msg.str());
      }
      break;
    }
  }
  return r;
}

ScenarioReport Runner::run() {
  const auto wall_start = std::chrono::steady_clock::now();
  report_.name = script_.name;
  report_.seed = seed_;
  rescan();

  json steps = json::array();
  for (std::size_t i = 0; i < script_.steps.size(); ++i) {
    const auto& step = script_.steps[i];
    now_ = now_ + std::chrono::seconds(1);
    json entry = {{"index", i},
                  {"kind", step_kind_name(step.kind)},
                  {"time", now_.to_iso8601()}};
    if (!step.tag.empty()) entry["tag"] = step.tag;
    entry["result"] = exec(step);
    steps.push_back(std::move(entry));
  }

  json epochs = json::array();
  for (const auto& e : report_.epochs) {
    json j = {{"label", e.label}, {"id", e.id}, {"timestamp", e.timestamp.to_iso8601()}};
    if (e.color) {
      j["color"] = color_json(*e.color);
      j["ordinal"] = *e.ordinal;
    }
    epochs.push_back(std::move(j));
  }
  json measurements = json::array();
  for (const auto& m : report_.measurements) {
    json j = {{"label", m.label},
              {"from", pin_json(m.from)},
              {"to", pin_json(m.to)},
              {"distance_m", m.distance_m},
              {"distance_display", m.display},
              {"elapsed_s", m.elapsed_s}};
    if (m.ground_truth_m) j["ground_truth_m"] = *m.ground_truth_m;
    measurements.push_back(std::move(j));
  }
  json assertions = json::array();
  for (const auto& a : report_.assertions) {
    assertions.push_back({{"measurement", a.measurement},
                          {"expected", a.expected},
                          {"tolerance", a.tolerance},
                          {"measured", a.measured},
                          {"passed", a.passed}});
  }
  json doc = {{"scenario", script_.name},
              {"seed", seed_},
              {"edge_length", script_.edge_length},
              {"noise_sigma", noise_},
              {"pin_jitter", jitter_},
              {"epochs", epochs},
              {"steps", steps},
              {"measurements", measurements},
              {"assertions", assertions},
              {"passed", report_.passed}};
  if (options_.include_timing) {
    doc["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  }
  report_.json = doc.dump(2) + "\n";
  report_.final_scene = scene_;
  report_.scan_counter = scan_counter_ - 1;
  return std::move(report_);
}

}  // namespace

std::uint64_t scan_seed(std::uint64_t seed, std::uint32_t counter) {
  return derive_seed(seed, 0x5CA7, counter);
}

std::string_view step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::Save: return "save";
    case StepKind::Wait: return "wait";
    case StepKind::Move: return "move";
    case StepKind::Rescan: return "rescan";
    case StepKind::Load: return "load";
    case StepKind::Unload: return "unload";
    case StepKind::ToggleLive: return "toggle_live";
    case StepKind::Pin: return "pin";
    case StepKind::Measure: return "measure";
    case StepKind::Clear: return "clear";
    case StepKind::View: return "view";
    case StepKind::Trail: return "trail";
    case StepKind::Settings: return "settings";
    case StepKind::Assert: return "assert";
  }
  return "unknown";
}

const MeasurementRecord* ScenarioReport::measurement(std::string_view label) const {
  for (auto it = measurements.rbegin(); it != measurements.rend(); ++it) {
    if (it->label == label) return &*it;
  }
  return nullptr;
}

ScenarioScript parse_scenario(std::string_view yaml_text) {
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (!root.IsMap()) script_error("scenario must be a mapping");
    ScenarioScript s;
    s.name = get_or<std::string>(root, "name", "scenario");
    s.description = get_or<std::string>(root, "description", "");
    s.seed = get_or<std::uint64_t>(root, "seed", 1);
    if (root["start_time"]) {
      s.start_time = Timestamp::parse_iso8601(root["start_time"].as<std::string>());
    }
    s.scene = scene_from_node(root["scene"]);
    if (const auto scan = root["scan"]) {
      s.edge_length = get_or(scan, "edge_length", s.edge_length);
      s.noise_sigma = get_or(scan, "noise_sigma", s.noise_sigma);
      s.pin_jitter = get_or(scan, "pin_jitter", s.pin_jitter);
    }
    if (!root["steps"] || !root["steps"].IsSequence()) script_error("scenario has no steps");
    std::size_t i = 0;
    for (const auto& step : root["steps"]) s.steps.push_back(parse_step(step, i++));
    return s;
  } catch (const YAML::Exception& e) {
    script_error(std::string("YAML: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ScriptError) throw;
    script_error(e.what());
  }
}

ScenarioScript load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open scenario " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

SceneSpec parse_scene(std::string_view yaml_text) {
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    return scene_from_node(root["scene"] ? root["scene"] : root);
  } catch (const YAML::Exception& e) {
    script_error(std::string("YAML: ") + e.what());
  }
}

ScenarioReport run_scenario(const ScenarioScript& script, LayerRegistry& registry,
                            MeasurementSession& session, const RunOptions& options) {
  return Runner(script, registry, session, options).run();
}

}  // namespace tmm::sim
