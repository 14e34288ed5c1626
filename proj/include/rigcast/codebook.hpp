#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigcast/dwt.hpp"
#include "rigcast/kmeans.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast {

// Per-channel vector quantizer over wavelet coefficients of tau-segments.
struct Codebook {
  Channel channel = Channel::HKLA;
  Duration tau_length{};
  Duration tau_step{};
  Duration sample_period = kCanonicalSamplePeriod;
  dwt::WaveletSpec wavelet;
  KMeansModel quantizer;

  std::size_t k() const { return quantizer.k(); }
  std::size_t tau_samples() const;

  // Codeword of a segment of exactly tau_samples() values. `scratch` is
  // reused between calls by hot loops.
  std::size_t assign(std::span<const double> segment) const;
  std::size_t assign(std::span<const double> segment, std::vector<double>& coeffs,
                     std::vector<double>& scratch) const;
  // Codeword of precomputed coefficients.
  std::size_t assign_coefficients(std::span<const double> coefficients) const;

  bool operator==(const Codebook&) const = default;
};

struct CodebookOptions {
  Duration tau_length = minutes(24);
  Duration tau_step = minutes(24);
  dwt::WaveletSpec wavelet;
  std::size_t k = 200;
  std::uint64_t seed = 0;
  int max_iter = 30;
  double tol = 1e-4;
};

// Coefficient rows of every tau window of `channel` across `logs`, in log
// order then window order.
Matrix codebook_training_matrix(std::span<const TelemetryLog> logs, Channel channel,
                                const CodebookOptions& options);

Codebook build_codebook(std::span<const TelemetryLog> logs, Channel channel, const CodebookOptions& options);

// One codebook per channel in canonical order. Channels are independent and
// built in parallel.
std::vector<Codebook> build_codebooks(std::span<const TelemetryLog> logs, const CodebookOptions& options);

}  // namespace rigcast
