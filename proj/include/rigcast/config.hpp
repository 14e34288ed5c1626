#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rigcast/boosting.hpp"
#include "rigcast/dwt.hpp"
#include "rigcast/features.hpp"
#include "rigcast/synth.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast {

// Everything a run depends on. Defaults are the tuned operating point:
// tau 24 min, t 72 min, K 200, bior2.4 level 3, 10 min inference step.
struct PipelineConfig {
  std::uint64_t seed = 7;
  ChannelSpecs specs = canonical_specs();

  WindowConfig window;
  Duration codebook_tau_step = minutes(24);
  dwt::WaveletSpec wavelet{dwt::Family::Bior24, 3};
  std::size_t k = 200;
  int kmeans_max_iter = 30;
  double kmeans_tol = 1e-3;

  BoostingParams boosting;

  std::size_t crossval_folds = 5;
  Duration pre_accident_interval = hours(24);
  std::size_t normal_intervals = 20;
  Duration normal_interval_length = hours(8);
  Duration normal_clearance = hours(24);

  Duration inference_step = minutes(10);
  double threshold = 0.5;

  // Synthetic corpus.
  std::size_t synth_wells = 60;
  double synth_hours = 48.0;
  std::size_t synth_accidents_per_type = 7;
  double synth_pattern_amplitude = 5.0;

  // Tuning grids.
  std::vector<dwt::Family> stage1_families = {dwt::Family::Db3, dwt::Family::Coif5, dwt::Family::Bior24};
  std::vector<int> stage1_levels = {3, 4, 5};
  std::vector<std::size_t> stage1_ks = {100, 200};
  std::size_t stage1_segments = 900;
  std::size_t stage1_n_min = 2;
  std::size_t stage1_n_max = 45;
  std::vector<double> stage2_tau_minutes = {8, 24, 50};
  std::vector<double> stage2_t_minutes = {72, 180, 420};
  std::vector<std::size_t> sensitivity_ks = {10, 20, 40, 100, 200, 400};
  std::vector<std::size_t> sensitivity_ns = {2, 5, 10, 15, 25, 35, 45};
  std::size_t sensitivity_repeats = 3;
  std::vector<double> step_minutes = {10, 20, 30, 60, 120};

  // Codebook options derived from this config.
  CodebookOptions codebook_options(std::uint64_t seed_value) const;
  // Synthetic scenario derived from this config.
  synth::ScenarioConfig scenario() const;

  // Sorted `key=value` lines covering every key; parse(to_text()) == *this.
  std::string to_text() const;
  bool operator==(const PipelineConfig&) const = default;
};

// Applies `key=value` lines (blank lines and '#' comments ignored) over the
// defaults. Throws ConfigurationError on unknown keys or bad values.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace rigcast
