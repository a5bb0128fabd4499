#include "tmm/timestamp.hpp"

#include <charconv>
#include <cstdio>

#include "tmm/error.hpp"

namespace tmm {

namespace {

using namespace std::chrono;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) {
    throw Error(ErrorCode::InvalidArgument, "timestamp too short");
  }
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::InvalidArgument,
                  "bad digit in timestamp '" + std::string(text) + "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::InvalidArgument,
                "malformed timestamp '" + std::string(text) + "'");
  }
}

}  // namespace

Timestamp Timestamp::now() {
  const auto t = time_point_cast<milliseconds>(system_clock::now());
  return Timestamp(t.time_since_epoch().count());
}

Timestamp Timestamp::parse_iso8601(std::string_view text) {
  const int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = parse_fixed(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = parse_fixed(text, 8, 2);
  expect_char(text, 10, 'T');
  const int h = parse_fixed(text, 11, 2);
  expect_char(text, 13, ':');
  const int mi = parse_fixed(text, 14, 2);
  expect_char(text, 16, ':');
  const int s = parse_fixed(text, 17, 2);
  std::size_t pos = 19;
  int ms = 0;
  if (pos < text.size() && text[pos] == '.') {
    ms = parse_fixed(text, pos + 1, 3);
    pos += 4;
  }
  expect_char(text, pos, 'Z');
  if (pos + 1 != text.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "trailing characters in timestamp '" + std::string(text) + "'");
  }

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::InvalidArgument,
                "out-of-range field in timestamp '" + std::string(text) + "'");
  }
  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
  return Timestamp(tp.time_since_epoch().count());
}

std::string Timestamp::to_iso8601() const {
  const sys_time<milliseconds> tp{milliseconds{ms_}};
  const auto day_start = floor<days>(tp);
  const year_month_day ymd{day_start};
  hh_mm_ss<milliseconds> tod{tp - day_start};

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long long>(tod.hours().count()),
                static_cast<long long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()),
                static_cast<long long>(tod.subseconds().count()));
  return buf;
}

}  // namespace tmm
