#include "rigcast/codebook.hpp"

#include <limits>
#include <string>

#include "rigcast/error.hpp"
#include "rigcast/features.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

std::size_t Codebook::tau_samples() const { return to_samples(tau_length, sample_period); }

std::size_t Codebook::assign(std::span<const double> segment) const {
  std::vector<double> coeffs;
  std::vector<double> scratch;
  return assign(segment, coeffs, scratch);
}

std::size_t Codebook::assign(std::span<const double> segment, std::vector<double>& coeffs,
                             std::vector<double>& scratch) const {
  if (segment.size() != tau_samples()) {
    throw ShapeError("codebook for " + std::string(channel_name(channel)) + " expects " +
                     std::to_string(tau_samples()) + "-sample segments, got " +
                     std::to_string(segment.size()));
  }
  coeffs.resize(quantizer.dim());
  dwt::decompose_into(segment, wavelet, coeffs, scratch);
  return quantizer.nearest(coeffs);
}

std::size_t Codebook::assign_coefficients(std::span<const double> coefficients) const {
  if (coefficients.size() != quantizer.dim()) {
    throw ShapeError("expected " + std::to_string(quantizer.dim()) + " coefficients, got " +
                     std::to_string(coefficients.size()));
  }
  return quantizer.nearest(coefficients);
}

Matrix codebook_training_matrix(std::span<const TelemetryLog> logs, Channel channel,
                                const CodebookOptions& options) {
  if (logs.empty()) return {};
  const auto period = logs.front().sample_period;
  const std::size_t tau = to_samples(options.tau_length, period);
  const std::size_t step = to_samples(options.tau_step, period);
  if (tau == 0 || step == 0) throw ConfigurationError("tau length and step must be positive");
  const std::size_t dim = dwt::coefficient_length(tau, options.wavelet);

  std::size_t rows = 0;
  for (const auto& log : logs) {
    if (log.sample_period != period) throw ConfigurationError("logs have different sample periods");
    rows += window_count(log.length(), tau, step);
  }
  Matrix matrix(rows, dim);
  std::size_t r = 0;
  std::vector<double> scratch;
  for (const auto& log : logs) {
    const auto series = log.channel(channel);
    const std::size_t count = window_count(series.size(), tau, step);
    for (std::size_t w = 0; w < count; ++w) {
      dwt::decompose_into(series.subspan(w * step, tau), options.wavelet, matrix.row(r++), scratch);
    }
  }
  return matrix;
}

Codebook build_codebook(std::span<const TelemetryLog> logs, Channel channel, const CodebookOptions& options) {
  Codebook cb;
  cb.channel = channel;
  cb.tau_length = options.tau_length;
  cb.tau_step = options.tau_step;
  cb.sample_period = logs.empty() ? kCanonicalSamplePeriod : logs.front().sample_period;
  cb.wavelet = options.wavelet;
  const Matrix rows = codebook_training_matrix(logs, channel, options);
  if (rows.rows() < options.k) {
    throw InsufficientDataError("codebook for " + std::string(channel_name(channel)) + " has " +
                                std::to_string(rows.rows()) + " tau-segments, needs at least K=" +
                                std::to_string(options.k));
  }
  cb.quantizer = fit_kmeans(rows, options.k, {options.seed, options.max_iter, options.tol});
  return cb;
}

std::vector<Codebook> build_codebooks(std::span<const TelemetryLog> logs, const CodebookOptions& options) {
  std::vector<Codebook> out(kChannelCount);
  parallel_for(kChannelCount, [&](std::size_t c) {
    auto opts = options;
    opts.seed = derive_seed(options.seed, "codebook", c);
    out[c] = build_codebook(logs, kAllChannels[c], opts);
  });
  return out;
}

}  // namespace rigcast
