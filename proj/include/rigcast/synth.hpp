#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rigcast/features.hpp"
#include "rigcast/metrics.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast::synth {

struct ScheduledAccident {
  std::size_t well = 0;
  AccidentType type = AccidentType::Stuck;
  Duration start_offset{};  // from the well's log start

  bool operator==(const ScheduledAccident&) const = default;
};

struct ScenarioConfig {
  std::size_t n_wells = 60;
  double hours_per_well = 48.0;
  Duration sample_period = kCanonicalSamplePeriod;
  std::vector<ScheduledAccident> schedule;
  std::array<double, kChannelCount> noise_std = {1.0, 0.1, 0.05, 0.05, 0.8, 0.4, 1.5, 2.0, 0.5, 1.0, 0.005};
  // Precursor amplitude in units of the channel noise level.
  double pattern_amplitude = 5.0;
  std::uint64_t seed = 7;
  Timestamp epoch = std::chrono::sys_days{std::chrono::year{2019} / 1 / 1};
};

// Deterministic schedule: `per_type` accidents of every type on distinct,
// seeded wells, each starting between 30 h into the log and 1 h before its end.
std::vector<ScheduledAccident> balanced_schedule(std::size_t n_wells, double hours_per_well,
                                                 std::size_t per_type, std::uint64_t seed);

// 60 wells x 48 h, 7 accidents per type, seed 7.
ScenarioConfig default_scenario();

// Region of one channel carrying an injected precursor.
struct Annotation {
  std::string well_id;
  Channel channel;
  Timestamp start;
  Timestamp end;
  AccidentType type;

  bool operator==(const Annotation&) const = default;
};

struct Corpus {
  std::vector<TelemetryLog> logs;
  std::vector<AccidentRecord> accidents;
  std::vector<Annotation> annotations;
};

std::string well_name(std::size_t index);

// Throws ConfigurationError when an accident leaves less than 24 h of prior
// log or falls outside its well.
Corpus generate_corpus(const ScenarioConfig& config);

// Accident type whose precursor regions cover at least half of the span,
// choosing the largest coverage; nullopt means normal drilling.
std::optional<AccidentType> dominant_class(std::span<const Annotation> annotations, const SegmentSpan& span);

// entry(i, j) = 1 iff both segments share a dominant class.
SimilarityMatrix reference_similarity(std::span<const Annotation> annotations, std::span<const SegmentSpan> segments);

// Columns: well_id,channel,start,end,pattern_type.
void write_annotations(std::span<const Annotation> annotations, const std::filesystem::path& path);
std::vector<Annotation> load_annotations(const std::filesystem::path& path);

}  // namespace rigcast::synth
