#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace rigcast {

using Duration = std::chrono::seconds;
using Timestamp = std::chrono::sys_seconds;

inline constexpr Duration minutes(double m) {
  return Duration{static_cast<std::int64_t>(m * 60.0 + (m >= 0 ? 0.5 : -0.5))};
}
inline constexpr Duration hours(double h) { return minutes(h * 60.0); }

// Accepts "YYYY-MM-DDTHH:MM:SS" with an optional trailing 'Z'; a space is
// accepted in place of 'T'. Throws FormatError on anything else.
Timestamp parse_time(std::string_view text);

// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_time(Timestamp t);

// Whole number of samples in `d`; throws ConfigurationError when `d` is not a
// multiple of `period`.
std::size_t to_samples(Duration d, Duration period);

}  // namespace rigcast
