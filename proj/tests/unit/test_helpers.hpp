#pragma once

#include <cmath>
#include <string>

#include "rigcast/rng.hpp"
#include "rigcast/telemetry.hpp"
#include "rigcast/time.hpp"

namespace test {

inline rigcast::Timestamp t0() { return rigcast::parse_time("2019-03-01T00:00:00Z"); }

// In-range log whose channels are slow sines plus a little seeded noise.
inline rigcast::TelemetryLog wavy_log(std::size_t n, std::uint64_t seed, std::string id = "w") {
  rigcast::TelemetryLog log;
  log.well_id = std::move(id);
  log.start_time = t0();
  rigcast::Rng rng(seed);
  const auto& specs = rigcast::canonical_specs();
  for (std::size_t c = 0; c < rigcast::kChannelCount; ++c) {
    const double lo = specs[c].min_value, hi = specs[c].max_value;
    const double mid = lo + 0.3 * (hi - lo), amp = 0.1 * (hi - lo);
    auto& v = log.channels[c];
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = mid + amp * std::sin(0.01 * static_cast<double>(i * (c + 1))) +
             0.01 * amp * (rigcast::uniform01(rng) - 0.5);
    }
  }
  return log;
}

inline std::string csv_header() { return "time,HKLA,BPOS,DBTM,DMEA,TQA,WOB,RPMA,SPPA,MFIA,TVT,GASA\n"; }

}  // namespace test
