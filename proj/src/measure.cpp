#include "tmm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tmm/error.hpp"

namespace tmm {

std::string_view units_symbol(Units u) {
  switch (u) {
    case Units::Meters: return "m";
    case Units::Centimeters: return "cm";
    case Units::Feet: return "ft";
    case Units::Inches: return "in";
  }
  return "m";
}

Units parse_units(std::string_view text) {
  if (text == "m") return Units::Meters;
  if (text == "cm") return Units::Centimeters;
  if (text == "ft") return Units::Feet;
  if (text == "in") return Units::Inches;
  throw Error(ErrorCode::InvalidArgument, "unknown units '" + std::string(text) + "'");
}

std::string_view mode_name(MeasureMode m) {
  return m == MeasureMode::Distance ? "Distance" : "QuickMeasure";
}

MeasureMode parse_mode(std::string_view text) {
  if (text == "Distance" || text == "distance") return MeasureMode::Distance;
  if (text == "QuickMeasure" || text == "quick") return MeasureMode::QuickMeasure;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

double meters_to(Units u, double meters) {
  switch (u) {
    case Units::Meters: return meters;
    case Units::Centimeters: return meters * 100.0;
    case Units::Feet: return meters * kFeetPerMeter;
    case Units::Inches: return meters * kInchesPerMeter;
  }
  return meters;
}

std::string format_distance(double meters, Units u) {
  const int decimals = u == Units::Feet ? 4 : 2;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f %s", decimals, meters_to(u, meters),
                std::string(units_symbol(u)).c_str());
  return buf;
}

MeasurementResult measure_between(const Pin& a, const Pin& b) {
  MeasurementResult r;
  r.distance_m = (a.position - b.position).norm();
  r.elapsed = elapsed_between(a.source_time, b.source_time);
  return r;
}

double font_scale(double font_base, double viewer_distance_m) {
  if (!(viewer_distance_m > 0.0) || !std::isfinite(viewer_distance_m)) {
    throw Error(ErrorCode::InvalidArgument, "viewer distance must be positive");
  }
  const double factor = std::clamp(viewer_distance_m / kFontReferenceDistance,
                                   kFontMinFactor, kFontMaxFactor);
  return font_base * factor;
}

Pin pin_from_hit(const Hit& hit, Timestamp now) {
  Pin p;
  p.position = hit.point;
  p.source_layer = hit.layer_id;
  p.source_time = hit.layer_id == kLiveLayerId ? now : hit.timestamp;
  return p;
}

const Pin& MeasurementSession::place_pin(LayerSet layers, const Ray& ray, Timestamp now) {
  const auto hit = ray_cast(layers, ray);
  if (!hit) throw Error(ErrorCode::NoHit, "ray misses every targeted layer");
  return add_pin(pin_from_hit(*hit, now));
}

const Pin& MeasurementSession::add_pin(Pin pin) {
  pins_.push_back(std::move(pin));
  rebuild_segments();
  return pins_.back();
}

const Pin& MeasurementSession::move_pin(std::size_t index, LayerSet layers, const Ray& ray,
                                        Timestamp now) {
  if (index >= pins_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "no pin " + std::to_string(index));
  }
  if (!pins_[index].movable) {
    throw Error(ErrorCode::PinLocked, "pin " + std::to_string(index) + " is not movable");
  }
  const auto hit = ray_cast(layers, ray);
  if (!hit) throw Error(ErrorCode::NoHit, "ray misses every targeted layer");
  pins_[index] = pin_from_hit(*hit, now);
  rebuild_segments();
  return pins_[index];
}

void MeasurementSession::clear_measurements() {
  pins_.clear();
  segments_.clear();
}

void MeasurementSession::set_font_size(double font_base) {
  if (!(font_base > 0.0) || !std::isfinite(font_base)) {
    throw Error(ErrorCode::InvalidArgument, "font size must be positive");
  }
  font_base_ = font_base;
}

void MeasurementSession::set_line_width(double meters) {
  if (!(meters > 0.0) || !std::isfinite(meters)) {
    throw Error(ErrorCode::InvalidArgument, "line width must be positive");
  }
  line_width_ = meters;
}

void MeasurementSession::set_mode(MeasureMode m) {
  mode_ = m;
  if (m == MeasureMode::QuickMeasure) {
    units_ = Units::Meters;
    font_base_ = kDefaultFontBase;
    line_width_ = kDefaultLineWidth;
  }
}

void MeasurementSession::rebuild_segments() {
  segments_.clear();
  for (std::size_t i = 1; i < pins_.size(); ++i) {
    auto r = measure_between(pins_[i - 1], pins_[i]);
    r.from = i - 1;
    r.to = i;
    segments_.push_back(r);
  }
}

}  // namespace tmm
