#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rigcast/config.hpp"
#include "rigcast/metrics.hpp"
#include "rigcast/model.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast {

struct AlarmTally {
  std::size_t true_forecasts = 0;
  std::size_t false_alarms = 0;
  std::array<std::size_t, kAccidentTypeCount> accidents{};
  std::array<std::size_t, kAccidentTypeCount> forecasted{};
  std::array<std::size_t, kAccidentTypeCount> missed{};

  bool operator==(const AlarmTally&) const = default;
};

// An alarm is a true forecast when an accident of the same type on the same
// well starts within `horizon` after it; an accident counts as forecasted
// when at least one true forecast points at it.
AlarmTally alarm_accounting(std::span<const Alarm> alarms, std::span<const AccidentRecord> accidents,
                            Duration horizon = kForecastHorizon);

// fold_of[w] is the test fold of logs[w]. Reshuffles until every fold's
// training wells hold every accident type present in the corpus; throws
// ConfigurationError after `max_attempts`.
std::vector<std::size_t> assign_folds(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                      std::size_t k, std::uint64_t seed, std::size_t max_attempts = 1000);

// A stretch of a test well that is streamed through the model.
struct TestInterval {
  Timestamp start;
  Timestamp end;
  bool pre_accident = false;

  bool operator==(const TestInterval&) const = default;
};

// The 24 h before each accident plus `normal_intervals` seeded normal
// stretches at least `normal_clearance` away from every accident. Normal
// starts sit on a whole-hour grid from the log start and may repeat.
std::vector<TestInterval> test_intervals(const TelemetryLog& log, std::span<const AccidentRecord> accidents,
                                         const PipelineConfig& config, std::uint64_t seed);

enum class Variant { BagOfFeatures, Breakdown, PermutedLabels };

std::string_view variant_name(Variant v);

struct FoldMetrics {
  std::size_t fold = 0;
  std::size_t test_wells = 0;
  std::size_t windows = 0;
  std::array<std::optional<double>, kAccidentTypeCount> type_auc;
  double macro_auc = 0.0;
  std::optional<double> binary_auc;
  double tpr = 0.0;
  double fpr = 0.0;
  AlarmTally alarms;

  bool operator==(const FoldMetrics&) const = default;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;

  bool operator==(const MeanStd&) const = default;
};

struct EvalReport {
  Variant variant = Variant::BagOfFeatures;
  Duration step{};
  double threshold = 0.5;
  std::vector<FoldMetrics> folds;
  MeanStd macro_auc;
  MeanStd binary_auc;
  MeanStd tpr;
  MeanStd fpr;
  // Macro AUC over the windows of all folds pooled together.
  double pooled_macro_auc = 0.0;
  // Binary "any accident" curve over the pooled windows, scored by the
  // largest type probability.
  std::vector<RocPoint> roc;

  bool operator==(const EvalReport&) const = default;
};

struct CrossvalPlan {
  std::vector<Variant> variants = {Variant::BagOfFeatures};
  // Inference steps; empty means config.inference_step.
  std::vector<Duration> steps;
};

// Well-based k-fold cross-validation. Every fold rebuilds codebooks and
// models from its training wells only; all variants and steps share the
// same folds, codebooks and test intervals. Reports come back variant-major
// in plan order.
std::vector<EvalReport> crossval(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                 const PipelineConfig& config, const CrossvalPlan& plan);

EvalReport crossval(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                    const PipelineConfig& config);

// Codebooks plus one-vs-rest ensembles fitted on every t-window at
// config.window.t_step across `logs`. The model carries its codebooks and
// window config, so it featurizes raw logs on its own.
ForecastModel fit_pipeline(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                           const PipelineConfig& config);

void write_report_text(const EvalReport& report, std::ostream& out);
// One row per fold followed by mean and std rows.
void write_report_csv(const EvalReport& report, std::ostream& out);
// Columns: fpr,tpr,threshold.
void write_roc_csv(std::span<const RocPoint> curve, std::ostream& out);

}  // namespace rigcast
