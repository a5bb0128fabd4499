#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/mesh.hpp"
#include "tmm/spatial_index.hpp"
#include "tmm/timestamp.hpp"

namespace tmm {

enum class Units { Meters, Centimeters, Feet, Inches };
enum class MeasureMode { Distance, QuickMeasure };

inline constexpr double kFeetPerMeter = 3.28084;
inline constexpr double kInchesPerMeter = 39.3701;

inline constexpr double kDefaultFontBase = 1.0;
inline constexpr double kDefaultLineWidth = 0.005;  // meters
inline constexpr double kFontReferenceDistance = 1.0;  // meters
inline constexpr double kFontMinFactor = 0.25;
inline constexpr double kFontMaxFactor = 8.0;

std::string_view units_symbol(Units u);
/// Accepts "m", "cm", "ft", "in".
Units parse_units(std::string_view text);
std::string_view mode_name(MeasureMode m);
MeasureMode parse_mode(std::string_view text);

double meters_to(Units u, double meters);
/// "93.00 cm", "3.2808 ft": meters/cm/in with 2 decimals, feet with 4.
std::string format_distance(double meters, Units u);

struct Pin {
  Point3 position;
  std::string source_layer;
  Timestamp source_time;
  bool movable = true;
};

struct MeasurementResult {
  double distance_m = 0.0;
  std::chrono::milliseconds elapsed{0};
  std::size_t from = 0;
  std::size_t to = 0;
};

/// Euclidean distance in the world frame and |Δt| between the pins' sources.
MeasurementResult measure_between(const Pin& a, const Pin& b);

/// Rendered label size: font_base · d/d_ref clamped to [0.25, 8]·font_base,
/// so the angular size stays constant inside the clamp range. Throws
/// InvalidArgument unless viewer_distance_m > 0.
double font_scale(double font_base, double viewer_distance_m);

/// Ordered pins; segment i joins pin i and pin i+1. Distances are always
/// stored in meters.
class MeasurementSession {
 public:
  using LayerSet = std::span<const std::shared_ptr<const LayerIndex>>;

  std::span<const Pin> pins() const { return pins_; }
  std::span<const MeasurementResult> segments() const { return segments_; }

  Units units() const { return units_; }
  double font_base() const { return font_base_; }
  double line_width() const { return line_width_; }
  MeasureMode mode() const { return mode_; }

  /// Casts the ray, appends a pin at the hit and a segment to the previous
  /// pin. Saved-layer pins take the snapshot's timestamp, LIVE pins `now`.
  /// Throws NoHit (session unchanged).
  const Pin& place_pin(LayerSet layers, const Ray& ray, Timestamp now);

  /// Appends an already-resolved pin (session restore, scripted pins).
  const Pin& add_pin(Pin pin);

  /// Re-casts a pin and recomputes its incident segments. Throws NoHit,
  /// PinLocked or IndexOutOfRange; the session is unchanged on error.
  const Pin& move_pin(std::size_t index, LayerSet layers, const Ray& ray, Timestamp now);

  void clear_measurements();

  void set_units(Units u) { units_ = u; }
  void set_font_size(double font_base);
  void set_line_width(double meters);
  /// QuickMeasure restores meters and the default font and line width.
  void set_mode(MeasureMode m);

  std::string display(const MeasurementResult& r) const {
    return format_distance(r.distance_m, units_);
  }

 private:
  void rebuild_segments();

  std::vector<Pin> pins_;
  std::vector<MeasurementResult> segments_;
  Units units_ = Units::Meters;
  double font_base_ = kDefaultFontBase;
  double line_width_ = kDefaultLineWidth;
  MeasureMode mode_ = MeasureMode::Distance;
};

/// Pin produced by a ray cast hit; LIVE hits are stamped with `now`.
Pin pin_from_hit(const Hit& hit, Timestamp now);

}  // namespace tmm
