#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmm::ranker {

enum class Direction { HigherBetter, LowerBetter };

struct ParameterSchema {
  std::string name;
  double column_weight = 1.0;
  Direction direction = Direction::HigherBetter;
  /// Gate parameter: the device value is a {0,1} flag multiplying the score.
  bool necessary = false;
};

struct DeviceRecord {
  std::string name;
  std::map<std::string, double> values;  // missing key = missing value
};

/// Per-parameter fractions aligned with the schema; gate parameters carry
/// their 0/1 flag.
struct DeviceFractions {
  std::string name;
  std::vector<double> fractions;
};

struct ScoreLine {
  std::string name;
  double score = 0.0;
  double gate = 1.0;
  std::vector<double> contributions;  // column_weight · fraction, 0 for gates
};

struct ScoreReport {
  std::vector<ParameterSchema> schema;
  std::vector<ScoreLine> ranking;  // descending score, ties alphabetical
};

/// Raw values → fractions of the best device: value/best (higher-better) or
/// best/value (lower-better). Throws MissingValue, NonPositiveValue, or
/// InvalidArgument for a gate value outside {0,1}.
std::vector<DeviceFractions> normalize(std::span<const DeviceRecord> devices,
                                       std::span<const ParameterSchema> schema);

/// Pre-normalized rows; throws MissingValue, FractionOutOfRange or
/// InvalidArgument (bad gate).
std::vector<DeviceFractions> as_fractions(std::span<const DeviceRecord> devices,
                                          std::span<const ParameterSchema> schema);

/// S = (∏ gates) · Σ column_weight · fraction over non-gate parameters.
ScoreLine score(const DeviceFractions& device, std::span<const ParameterSchema> schema);

ScoreReport rank(std::span<const DeviceFractions> devices, std::span<const ParameterSchema> schema);

/// Header row = "name column" followed by parameter names; one device per row.
std::vector<DeviceRecord> parse_devices_csv(std::string_view text);

/// JSON array of {name, column_weight, direction: "higher"|"lower", necessary}.
std::vector<ParameterSchema> parse_schema_json(std::string_view text);

/// "Device  S" header then "<name>  <score to 2 decimals>" per device.
std::string format_table(const ScoreReport& report);
std::string report_json(const ScoreReport& report);

}  // namespace tmm::ranker
