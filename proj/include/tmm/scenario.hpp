#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/measure.hpp"
#include "tmm/registry.hpp"
#include "tmm/scene_sim.hpp"
#include "tmm/timestamp.hpp"
#include "tmm/transform.hpp"

namespace tmm::sim {

enum class StepKind {
  Save,
  Wait,
  Move,
  Rescan,
  Load,
  Unload,
  ToggleLive,
  Pin,
  Measure,
  Clear,
  View,
  Trail,
  Settings,
  Assert,
};

std::string_view step_kind_name(StepKind k);

struct ScenarioStep {
  StepKind kind = StepKind::Wait;
  std::string tag;

  std::string label;                // save, measure, unload
  std::vector<std::string> layers;  // load, trail
  std::string layer;                // pin
  std::string object;               // move, pin, trail
  std::string feature;              // pin, trail
  Vector3 translate = Vector3::Zero();
  double yaw_deg = 0.0;
  double scale = 1.0;
  double seconds = 0.0;
  std::optional<std::size_t> from, to;

  std::string measurement;  // assert
  double expected = 0.0;
  double tolerance = 0.0;           // absolute, meters
  double relative_tolerance = 0.0;  // fraction of expected

  std::optional<std::string> units, mode;
  std::optional<double> font_size, line_width;
};

struct ScenarioScript {
  std::string name;
  std::string description;
  std::uint64_t seed = 1;
  Timestamp start_time = Timestamp::parse_iso8601("2021-03-04T16:00:00.000Z");
  SceneSpec scene;
  double edge_length = 0.05;
  double noise_sigma = 0.01;
  double pin_jitter = 0.005;
  std::vector<ScenarioStep> steps;
};

/// YAML-shaped scenario file (see fixtures/). Throws ScriptError.
ScenarioScript parse_scenario(std::string_view yaml_text);
ScenarioScript load_scenario_file(const std::string& path);

/// Parses just the `scene:` mapping of a scenario-shaped document.
SceneSpec parse_scene(std::string_view yaml_text);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma;
  std::optional<double> pin_jitter;
  bool fail_fast = false;
  bool include_timing = false;
};

struct PinRecord {
  Point3 position;
  std::string layer_label;
  std::string layer_id;
  Timestamp time;
  std::optional<Point3> ground_truth;  // exact target on the scene geometry
};

struct MeasurementRecord {
  std::string label;
  double distance_m = 0.0;
  std::optional<double> ground_truth_m;
  double elapsed_s = 0.0;
  std::string display;
  PinRecord from, to;
};

struct AssertionRecord {
  std::string measurement;
  double expected = 0.0;
  double tolerance = 0.0;
  double measured = 0.0;
  bool passed = false;
};

struct EpochRecord {
  std::string label;
  std::string id;
  Timestamp timestamp;
  std::optional<std::size_t> ordinal;
  std::optional<Rgb> color;
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::vector<MeasurementRecord> measurements;
  std::vector<AssertionRecord> assertions;
  std::vector<Point3> trail_world;
  std::vector<Point3> trail_display;
  bool passed = true;
  std::string json;  // full report document

  /// Scene and live-scan state after the last step.
  Scene final_scene;
  std::uint32_t scan_counter = 0;  // counter of the scan currently live

  const MeasurementRecord* measurement(std::string_view label) const;
};

/// Seed of the n-th live scan of a scenario with base seed `seed`.
std::uint64_t scan_seed(std::uint64_t seed, std::uint32_t counter);

/// Executes the steps against the given registry and session with a
/// simulated clock starting at the script's start time. The live layer is
/// re-scanned after every move. Identical script, options and seed produce
/// an identical report (timing excluded unless requested).
///
/// With fail_fast, a failing assert throws AssertionFailed.
ScenarioReport run_scenario(const ScenarioScript& script, LayerRegistry& registry,
                            MeasurementSession& session, const RunOptions& options = {});

}  // namespace tmm::sim
