#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rigcast/codebook.hpp"
#include "rigcast/matrix.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast {

struct WindowConfig {
  Duration t_length = minutes(72);
  // Step between t-segments when building training sets.
  Duration t_step = minutes(60);
  Duration tau_length = minutes(24);
  // Step between tau-segments inside one t-segment.
  Duration tau_step = minutes(24);

  // Throws ConfigurationError when tau is longer than t or a duration is not a
  // whole number of samples.
  void validate(Duration sample_period) const;

  bool operator==(const WindowConfig&) const = default;
};

// Absolute time span and owner of one t-segment.
struct SegmentSpan {
  std::string well_id;
  Timestamp start;
  Timestamp end;

  bool operator==(const SegmentSpan&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  SegmentSpan span;
};

// Row i of `values` describes `spans[i]`.
struct FeatureSet {
  Matrix values;
  std::vector<SegmentSpan> spans;

  std::size_t size() const { return spans.size(); }
  FeatureVector at(std::size_t i) const;
  void append(const FeatureSet& other);
};

// floor((length - window) / step) + 1, or 0 when the window does not fit.
std::size_t window_count(std::size_t length, std::size_t window, std::size_t step);

std::vector<std::span<const double>> windows(std::span<const double> series, std::size_t window,
                                             std::size_t step);

// Codeword counts of the tau-windows of one t-segment.
std::vector<double> histogram(const Codebook& codebook, std::span<const double> t_segment,
                              std::size_t tau_step);

// Bag-of-features rows for t-windows at the given start sample indices. Each
// row concatenates the per-channel histograms in canonical channel order.
FeatureSet featurize_at(const TelemetryLog& log, std::span<const Codebook> codebooks,
                        const WindowConfig& config, std::span<const std::size_t> starts);

// All t-windows at config.t_step over the log.
FeatureSet featurize(const TelemetryLog& log, std::span<const Codebook> codebooks, const WindowConfig& config);

inline constexpr std::size_t kBreakdownStatsPerChannel = 6;
inline constexpr std::size_t kBreakdownDim = kBreakdownStatsPerChannel * kChannelCount;

// Per channel: mean, standard deviation, least-squares slope per minute, min,
// max, last minus first.
std::vector<double> breakdown_features(std::span<const std::span<const double>> segment_per_channel,
                                       Duration sample_period);

FeatureSet featurize_breakdown_at(const TelemetryLog& log, const WindowConfig& config,
                                  std::span<const std::size_t> starts);

// Columns: well_id,segment_start,segment_end,f0..f{D-1}.
void write_features_csv(const FeatureSet& features, const std::filesystem::path& path);

}  // namespace rigcast
