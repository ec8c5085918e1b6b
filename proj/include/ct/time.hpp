#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ct {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

/// Fixed UTC offset used as the corpus reference timezone.
struct UtcOffset {
  std::chrono::minutes minutes{0};

  friend bool operator==(const UtcOffset&, const UtcOffset&) = default;
};

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)". Throws Error(FormatError).
Instant parse_rfc3339(std::string_view text);

/// Formats an instant in the given offset, with milliseconds only when non-zero.
std::string format_rfc3339(Instant instant, UtcOffset offset = {});

/// Accepts "UTC", "Z", "GMT", "+HH:MM", "-HH:MM", "+HHMM", "-HHMM".
UtcOffset parse_utc_offset(std::string_view text);

/// Largest multiple of `width` (counted from the local-time epoch) not after `instant`.
Instant floor_to_bin(Instant instant, Millis width, UtcOffset offset);

}  // namespace ct
