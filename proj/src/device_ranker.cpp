#include "tmm/device_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "tmm/error.hpp"

namespace tmm::ranker {

namespace {

double require_value(const DeviceRecord& d, const ParameterSchema& p) {
  const auto it = d.values.find(p.name);
  if (it == d.values.end()) {
    throw Error(ErrorCode::MissingValue, d.name + " has no value for '" + p.name + "'");
  }
  return it->second;
}

double require_gate(const DeviceRecord& d, const ParameterSchema& p) {
  const double v = require_value(d, p);
  if (v != 0.0 && v != 1.0) {
    throw Error(ErrorCode::InvalidArgument,
                d.name + ": gate '" + p.name + "' must be 0 or 1");
  }
  return v;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

}  // namespace

std::vector<DeviceFractions> normalize(std::span<const DeviceRecord> devices,
                                       std::span<const ParameterSchema> schema) {
  std::vector<double> best(schema.size(), 0.0);
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const auto& p = schema[k];
    if (p.necessary) continue;
    bool first = true;
    for (const auto& d : devices) {
      const double v = require_value(d, p);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonPositiveValue,
                    d.name + ": '" + p.name + "' must be positive to take a ratio");
      }
      if (first) {
        best[k] = v;
        first = false;
      } else {
        best[k] = p.direction == Direction::HigherBetter ? std::max(best[k], v)
                                                         : std::min(best[k], v);
      }
    }
  }

  std::vector<DeviceFractions> out;
  for (const auto& d : devices) {
    DeviceFractions f{d.name, {}};
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto& p = schema[k];
      if (p.necessary) {
        f.fractions.push_back(require_gate(d, p));
        continue;
      }
      const double v = require_value(d, p);
      f.fractions.push_back(p.direction == Direction::HigherBetter ? v / best[k] : best[k] / v);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<DeviceFractions> as_fractions(std::span<const DeviceRecord> devices,
                                          std::span<const ParameterSchema> schema) {
  std::vector<DeviceFractions> out;
  for (const auto& d : devices) {
    DeviceFractions f{d.name, {}};
    for (const auto& p : schema) {
      if (p.necessary) {
        f.fractions.push_back(require_gate(d, p));
        continue;
      }
      const double v = require_value(d, p);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::FractionOutOfRange,
                    d.name + ": fraction for '" + p.name + "' is outside [0,1]");
      }
      f.fractions.push_back(v);
    }
    out.push_back(std::move(f));
  }
  return out;
}

ScoreLine score(const DeviceFractions& device, std::span<const ParameterSchema> schema) {
  if (device.fractions.size() != schema.size()) {
    throw Error(ErrorCode::InvalidArgument, device.name + ": fraction count mismatch");
  }
  ScoreLine line{device.name, 0.0, 1.0, {}};
  double sum = 0.0;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    if (schema[k].necessary) {
      line.gate *= device.fractions[k];
      line.contributions.push_back(0.0);
    } else {
      const double c = schema[k].column_weight * device.fractions[k];
      line.contributions.push_back(c);
      sum += c;
    }
  }
  line.score = line.gate * sum;
  return line;
}

ScoreReport rank(std::span<const DeviceFractions> devices,
                 std::span<const ParameterSchema> schema) {
  ScoreReport report;
  report.schema.assign(schema.begin(), schema.end());
  for (const auto& d : devices) report.ranking.push_back(score(d, schema));
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [](const ScoreLine& a, const ScoreLine& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.name < b.name;
                   });
  return report;
}

std::vector<DeviceRecord> parse_devices_csv(std::string_view text) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  std::vector<DeviceRecord> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    try {
      Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
      for (const auto& c : tok) cells.push_back(trim(c));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidArgument,
                  "CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    if (header.empty()) {
      header = std::move(cells);
      if (header.size() < 2) throw Error(ErrorCode::InvalidArgument, "CSV header too short");
      continue;
    }
    if (cells.size() > header.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "CSV line " + std::to_string(line_no) + " has extra cells");
    }
    DeviceRecord d;
    d.name = cells.at(0);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      if (cells[k].empty()) continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
        d.values[header[k]] = v;
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_no) +
                                                    ": bad number '" + cells[k] + "'");
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ParameterSchema> parse_schema_json(std::string_view text) {
  std::vector<ParameterSchema> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& item : doc) {
      ParameterSchema p;
      p.name = item.at("name").get<std::string>();
      p.column_weight = item.value("column_weight", 1.0);
      const std::string dir = item.value("direction", std::string("higher"));
      if (dir == "higher" || dir == "higher-better") {
        p.direction = Direction::HigherBetter;
      } else if (dir == "lower" || dir == "lower-better") {
        p.direction = Direction::LowerBetter;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown direction '" + dir + "'");
      }
      p.necessary = item.value("necessary", false);
      if (p.column_weight < 0.0) {
        throw Error(ErrorCode::InvalidArgument, p.name + ": column_weight must be ≥ 0");
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("schema: ") + e.what());
  }
  return out;
}

std::string format_table(const ScoreReport& report) {
  std::string out = "Device  S\n";
  char buf[32];
  for (const auto& line : report.ranking) {
    std::snprintf(buf, sizeof(buf), "%.2f", line.score);
    out += line.name + "  " + buf + "\n";
  }
  return out;
}

std::string report_json(const ScoreReport& report) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : report.schema) {
    params.push_back({{"name", p.name},
                      {"column_weight", p.column_weight},
                      {"direction", p.direction == Direction::HigherBetter ? "higher" : "lower"},
                      {"necessary", p.necessary}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& l = report.ranking[i];
    rows.push_back({{"rank", i + 1},
                    {"name", l.name},
                    {"score", l.score},
                    {"gate", l.gate},
                    {"contributions", l.contributions}});
  }
  return nlohmann::json{{"parameters", params}, {"ranking", rows}}.dump(2) + "\n";
}

}  // namespace tmm::ranker
