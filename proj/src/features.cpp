#include "rigcast/features.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <fstream>

#include "rigcast/error.hpp"
#include "rigcast/parallel.hpp"

namespace rigcast {

void WindowConfig::validate(Duration sample_period) const {
  if (tau_length > t_length) {
    throw ConfigurationError("tau length " + std::to_string(tau_length.count()) +
                             " s exceeds t length " + std::to_string(t_length.count()) + " s");
  }
  for (auto d : {t_length, t_step, tau_length, tau_step}) {
    if (to_samples(d, sample_period) == 0) throw ConfigurationError("window durations must be positive");
  }
}

FeatureVector FeatureSet::at(std::size_t i) const {
  const auto row = values.row(i);
  return {{row.begin(), row.end()}, spans[i]};
}

void FeatureSet::append(const FeatureSet& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    values.append_row(other.values.row(i));
    spans.push_back(other.spans[i]);
  }
}

std::size_t window_count(std::size_t length, std::size_t window, std::size_t step) {
  if (window == 0 || step == 0 || window > length) return 0;
  return (length - window) / step + 1;
}

std::vector<std::span<const double>> windows(std::span<const double> series, std::size_t window,
                                             std::size_t step) {
  std::vector<std::span<const double>> out;
  const std::size_t n = window_count(series.size(), window, step);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(series.subspan(i * step, window));
  return out;
}

std::vector<double> histogram(const Codebook& codebook, std::span<const double> t_segment,
                              std::size_t tau_step) {
  const std::size_t tau = codebook.tau_samples();
  if (t_segment.size() < tau) {
    throw ShapeError("t-segment of " + std::to_string(t_segment.size()) +
                     " samples is shorter than the " + std::to_string(tau) + "-sample tau window");
  }
  std::vector<double> counts(codebook.k(), 0.0);
  std::vector<double> coeffs;
  std::vector<double> scratch;
  for (auto w : windows(t_segment, tau, tau_step)) counts[codebook.assign(w, coeffs, scratch)] += 1.0;
  return counts;
}

namespace {

void check_codebooks(std::span<const Codebook> codebooks, const TelemetryLog& log, const WindowConfig& config) {
  if (codebooks.size() != kChannelCount) {
    throw ConfigurationError("expected " + std::to_string(kChannelCount) + " codebooks, got " +
                             std::to_string(codebooks.size()));
  }
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (codebooks[c].channel != kAllChannels[c]) {
      throw ConfigurationError("missing codebook for channel " + std::string(channel_name(kAllChannels[c])));
    }
    if (codebooks[c].tau_length != config.tau_length || codebooks[c].sample_period != log.sample_period) {
      throw ConfigurationError("codebook for " + std::string(channel_name(kAllChannels[c])) +
                               " was built for a different tau length or sample period");
    }
  }
}

std::vector<std::size_t> regular_starts(std::size_t length, std::size_t window, std::size_t step) {
  std::vector<std::size_t> starts(window_count(length, window, step));
  for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = i * step;
  return starts;
}

SegmentSpan span_of(const TelemetryLog& log, std::size_t start, std::size_t len) {
  return {log.well_id, log.time_at(start), log.time_at(start + len)};
}

}  // namespace

FeatureSet featurize_at(const TelemetryLog& log, std::span<const Codebook> codebooks,
                        const WindowConfig& config, std::span<const std::size_t> starts) {
  config.validate(log.sample_period);
  check_codebooks(codebooks, log, config);
  const std::size_t t_len = to_samples(config.t_length, log.sample_period);
  const std::size_t tau = to_samples(config.tau_length, log.sample_period);
  const std::size_t tau_step = to_samples(config.tau_step, log.sample_period);
  const std::size_t k = codebooks.front().k();
  for (const auto& cb : codebooks) {
    if (cb.k() != k) throw ConfigurationError("codebooks disagree on K");
  }

  const std::size_t per_window = window_count(t_len, tau, tau_step);
  for (std::size_t s : starts) {
    if (s + t_len > log.length()) throw ShapeError("t-window runs past the end of the log");
  }

  // Overlapping t-windows share tau-segments; quantize each distinct one once.
  std::vector<std::size_t> tau_starts;
  tau_starts.reserve(starts.size() * per_window);
  for (std::size_t s : starts) {
    for (std::size_t j = 0; j < per_window; ++j) tau_starts.push_back(s + j * tau_step);
  }
  std::sort(tau_starts.begin(), tau_starts.end());
  tau_starts.erase(std::unique(tau_starts.begin(), tau_starts.end()), tau_starts.end());

  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (tau_starts.size() + kBlock - 1) / kBlock;
  std::vector<std::uint32_t> codes(kChannelCount * tau_starts.size());
  parallel_for(kChannelCount * blocks, [&](std::size_t job) {
    const std::size_t c = job / blocks;
    const std::size_t first = (job % blocks) * kBlock;
    const std::size_t last = std::min(tau_starts.size(), first + kBlock);
    const std::span<const double> series(log.channels[c]);
    std::vector<double> coeffs;
    std::vector<double> scratch;
    for (std::size_t u = first; u < last; ++u) {
      codes[c * tau_starts.size() + u] =
          static_cast<std::uint32_t>(codebooks[c].assign(series.subspan(tau_starts[u], tau), coeffs, scratch));
    }
  });

  FeatureSet out;
  out.values = Matrix(starts.size(), kChannelCount * k);
  out.spans.resize(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    auto row = out.values.row(w);
    for (std::size_t j = 0; j < per_window; ++j) {
      const auto it = std::lower_bound(tau_starts.begin(), tau_starts.end(), starts[w] + j * tau_step);
      const auto u = static_cast<std::size_t>(it - tau_starts.begin());
      for (std::size_t c = 0; c < kChannelCount; ++c) row[c * k + codes[c * tau_starts.size() + u]] += 1.0;
    }
    out.spans[w] = span_of(log, starts[w], t_len);
  }
  return out;
}

FeatureSet featurize(const TelemetryLog& log, std::span<const Codebook> codebooks, const WindowConfig& config) {
  config.validate(log.sample_period);
  const auto starts = regular_starts(log.length(), to_samples(config.t_length, log.sample_period),
                                     to_samples(config.t_step, log.sample_period));
  if (starts.empty()) {
    check_codebooks(codebooks, log, config);
    FeatureSet empty;
    empty.values = Matrix(0, kChannelCount * codebooks.front().k());
    return empty;
  }
  return featurize_at(log, codebooks, config, starts);
}

std::vector<double> breakdown_features(std::span<const std::span<const double>> segment_per_channel,
                                       Duration sample_period) {
  if (segment_per_channel.size() != kChannelCount) {
    throw ShapeError("breakdown features need all " + std::to_string(kChannelCount) + " channels");
  }
  std::vector<double> out;
  out.reserve(kBreakdownDim);
  const double minutes_per_sample = static_cast<double>(sample_period.count()) / 60.0;
  for (const auto seg : segment_per_channel) {
    const std::size_t n = seg.size();
    if (n == 0) throw ShapeError("breakdown features need non-empty segments");
    double sum = 0.0, lo = seg[0], hi = seg[0];
    for (double v : seg) {
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);
    const double t_mean = 0.5 * static_cast<double>(n - 1);
    double var = 0.0, sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = seg[i] - mean;
      const double dt = static_cast<double>(i) - t_mean;
      var += dv * dv;
      sxy += dt * dv;
      sxx += dt * dt;
    }
    const double slope = sxx > 0.0 ? sxy / sxx / minutes_per_sample : 0.0;
    out.push_back(mean);
    out.push_back(std::sqrt(var / static_cast<double>(n)));
    out.push_back(slope);
    out.push_back(lo);
    out.push_back(hi);
    out.push_back(seg[n - 1] - seg[0]);
  }
  return out;
}

FeatureSet featurize_breakdown_at(const TelemetryLog& log, const WindowConfig& config,
                                  std::span<const std::size_t> starts) {
  const std::size_t t_len = to_samples(config.t_length, log.sample_period);
  FeatureSet out;
  out.values = Matrix(starts.size(), kBreakdownDim);
  out.spans.resize(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t s = starts[w];
    if (s + t_len > log.length()) throw ShapeError("t-window runs past the end of the log");
    std::array<std::span<const double>, kChannelCount> segs;
    for (std::size_t c = 0; c < kChannelCount; ++c) segs[c] = std::span<const double>(log.channels[c]).subspan(s, t_len);
    const auto f = breakdown_features(segs, log.sample_period);
    std::copy(f.begin(), f.end(), out.values.row(w).begin());
    out.spans[w] = span_of(log, s, t_len);
  }
  return out;
}

void write_features_csv(const FeatureSet& features, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << "well_id,segment_start,segment_end";
  for (std::size_t j = 0; j < features.values.cols(); ++j) f << ",f" << j;
  f << '\n';
  char buf[64];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& s = features.spans[i];
    f << s.well_id << ',' << format_time(s.start) << ',' << format_time(s.end);
    for (double v : features.values.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      f << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    f << '\n';
  }
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace rigcast
