#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tmm/error.hpp"
#include "tmm/measure.hpp"
#include "tmm/registry.hpp"
#include "tmm/scenario.hpp"
#include "tmm/scene_sim.hpp"
#include "tmm/transform.hpp"

namespace tmm {

inline constexpr std::string_view kWorkspaceFile = "workspace.json";
inline constexpr std::string_view kLibraryEnv = "TMM_LIBRARY";
inline constexpr std::string_view kDefaultLibrary = "tmm-library";
inline constexpr int kDefaultPort = 7700;

/// Height above a named point from which `x,y,z@layer` pins are dropped.
inline constexpr double kPointProbeHeight = 0.25;

/// Library path from an explicit flag, else $TMM_LIBRARY, else ./tmm-library.
std::filesystem::path resolve_library(const std::optional<std::string>& flag);

/// The simulated sensor feeding the live layer.
struct LiveSource {
  sim::Scene scene;
  double edge_length = 0.05;
  double noise_sigma = 0.01;
  std::uint64_t seed = 1;
  std::uint32_t scan_counter = 0;
  Timestamp scanned_at;
};

sim::SceneSpec default_scene();

/// Registry plus everything the command surfaces persist between calls
/// (`workspace.json` in the library directory): live scene source, loaded
/// layer slots and visibility, and the default measurement session/view.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path library);

  LayerRegistry& registry() { return registry_; }
  const LayerRegistry& registry() const { return registry_; }

  MeasurementSession& session() { return session_; }
  ViewState& view() { return view_; }
  const LiveSource& live() const { return live_; }

  /// Replaces the scene (if given) and takes a fresh scan.
  void reset(std::optional<sim::SceneSpec> spec, std::optional<double> noise_sigma,
             std::optional<double> edge_length, std::optional<std::uint64_t> seed,
             Timestamp now);
  void move(const std::string& object, const Vector3& translate, double yaw_deg, Timestamp now);

  /// Adopts the final state of a scenario run against this library.
  void adopt_scenario(const sim::ScenarioScript& script, const sim::ScenarioReport& report,
                      const MeasurementSession& session, std::uint64_t seed, double noise_sigma);

  void persist() const;

 private:
  void rescan(Timestamp now);
  void restore(const nlohmann::json& doc);

  LayerRegistry registry_;
  LiveSource live_;
  MeasurementSession session_;
  ViewState view_;
  mutable std::mutex mutex_;
};

/// Pin spec forms: "x,y,z@layer" (dropped straight down from
/// kPointProbeHeight above the point onto that layer) or
/// "ray:ox,oy,oz/dx,dy,dz" (cast against every visible layer).
struct PinSpec {
  Ray ray;
  TargetFilter filter;
};
PinSpec parse_pin_spec(std::string_view text);

nlohmann::json pin_json(const Pin& p);
nlohmann::json segment_json(const MeasurementSession& s, const MeasurementResult& r);
/// Measurement report: [{from, to, distance_m, distance_display, elapsed_s}].
nlohmann::json measurement_report(const MeasurementSession& s);
nlohmann::json settings_json(const MeasurementSession& s);
nlohmann::json view_json(const ViewState& v);
nlohmann::json descriptor_json(const LayerDescriptor& d);
nlohmann::json hit_json(const Hit& h);
nlohmann::json error_json(ErrorCode code, std::string_view message);

}  // namespace tmm
