#include "ct/time.hpp"

#include <charconv>
#include <cstdio>

#include "ct/error.hpp"

namespace ct {
namespace {

[[noreturn]] void bad_time(std::string_view text, const char* what) {
  throw Error(Errc::FormatError, "invalid RFC-3339 timestamp '" + std::string(text) + "': " + what);
}

int read_digits(std::string_view text, std::size_t pos, std::size_t count, std::string_view whole) {
  if (pos + count > text.size()) bad_time(whole, "truncated");
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') bad_time(whole, "expected digit");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) bad_time(whole, "unexpected separator");
}

}  // namespace

Instant parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4, text);
  expect(text, 4, '-', text);
  const int mo = read_digits(text, 5, 2, text);
  expect(text, 7, '-', text);
  const int d = read_digits(text, 8, 2, text);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) {
    bad_time(text, "missing time part");
  }
  const int hh = read_digits(text, 11, 2, text);
  expect(text, 13, ':', text);
  const int mm = read_digits(text, 14, 2, text);
  expect(text, 16, ':', text);
  const int ss = read_digits(text, 17, 2, text);
  std::size_t pos = 19;

  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) bad_time(text, "empty fraction");
  }

  if (pos >= text.size()) bad_time(text, "missing offset");
  int offset_minutes = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = read_digits(text, pos + 1, 2, text);
    expect(text, pos + 3, ':', text);
    const int om = read_digits(text, pos + 4, 2, text);
    if (oh > 23 || om > 59) bad_time(text, "offset out of range");
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    bad_time(text, "bad offset");
  }
  if (pos != text.size()) bad_time(text, "trailing characters");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad_time(text, "invalid date");
  if (hh > 23 || mm > 59 || ss > 60) bad_time(text, "invalid time of day");

  // Leap seconds fold onto the following second.
  const auto local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return time_point_cast<milliseconds>(local - minutes{offset_minutes});
}

std::string format_rfc3339(Instant instant, UtcOffset offset) {
  using namespace std::chrono;
  const auto local = instant + offset.minutes;
  const auto day_point = floor<days>(local);
  const year_month_day ymd{day_point};
  const hh_mm_ss<milliseconds> tod{local - day_point};

  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                        static_cast<long long>(tod.seconds().count()));
  std::string out(buf, static_cast<std::size_t>(n));
  if (tod.subseconds().count() != 0) {
    std::snprintf(buf, sizeof buf, ".%03lld", static_cast<long long>(tod.subseconds().count()));
    out += buf;
  }
  if (offset.minutes.count() == 0) {
    out += 'Z';
  } else {
    const long total = offset.minutes.count();
    const long magnitude = total < 0 ? -total : total;
    std::snprintf(buf, sizeof buf, "%c%02ld:%02ld", total < 0 ? '-' : '+', magnitude / 60, magnitude % 60);
    out += buf;
  }
  return out;
}

UtcOffset parse_utc_offset(std::string_view text) {
  if (text == "UTC" || text == "Z" || text == "GMT" || text == "utc") return {};
  auto fail = [&]() -> UtcOffset {
    throw Error(Errc::InvalidArgument,
                "unsupported timezone '" + std::string(text) + "' (use UTC or a fixed offset like +01:00)");
  };
  if (text.size() < 5 || (text[0] != '+' && text[0] != '-')) return fail();
  std::string digits;
  for (char c : text.substr(1)) {
    if (c == ':') continue;
    if (c < '0' || c > '9') return fail();
    digits += c;
  }
  if (digits.size() != 4) return fail();
  const int hours = (digits[0] - '0') * 10 + (digits[1] - '0');
  const int minutes = (digits[2] - '0') * 10 + (digits[3] - '0');
  if (hours > 23 || minutes > 59) return fail();
  const int sign = text[0] == '-' ? -1 : 1;
  return UtcOffset{std::chrono::minutes{sign * (hours * 60 + minutes)}};
}

Instant floor_to_bin(Instant instant, Millis width, UtcOffset offset) {
  const auto local = (instant + offset.minutes).time_since_epoch();
  auto q = local / width;
  if (local.count() < 0 && (local % width).count() != 0) --q;
  return Instant{q * width} - offset.minutes;
}

}  // namespace ct
