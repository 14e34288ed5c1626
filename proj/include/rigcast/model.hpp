#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "rigcast/boosting.hpp"
#include "rigcast/codebook.hpp"
#include "rigcast/features.hpp"
#include "rigcast/telemetry.hpp"

namespace rigcast {

// One flag per accident type; several may be set at once.
using LabelVector = std::array<bool, kAccidentTypeCount>;

inline constexpr Duration kForecastHorizon = hours(6);

// Type a is flagged iff an accident of type a on the same well starts between
// 0 and `horizon` after the segment end.
std::vector<LabelVector> label_segments(std::span<const SegmentSpan> segments,
                                        std::span<const AccidentRecord> accidents,
                                        Duration horizon = kForecastHorizon);

using Probabilities = std::array<double, kAccidentTypeCount>;

enum class FeatureKind { BagOfFeatures, Breakdown };

struct ForecastModel {
  FeatureKind kind = FeatureKind::BagOfFeatures;
  std::array<BoostedEnsemble, kAccidentTypeCount> ensembles;
  std::size_t feature_dim = 0;
  WindowConfig window;
  std::vector<Codebook> codebooks;  // canonical channel order; empty for non-histogram features
  BoostingParams params;

  bool operator==(const ForecastModel&) const = default;
};

// Seed of each per-type ensemble derived from params.seed.
std::array<std::uint64_t, kAccidentTypeCount> type_seeds(const BoostingParams& params);

// Fits the six one-vs-rest ensembles (in parallel). Throws TrainingError
// naming the first type without positive rows.
ForecastModel train(const Matrix& features, std::span<const LabelVector> labels, const BoostingParams& params);
ForecastModel train(const Matrix& features, std::span<const LabelVector> labels, const BoostingParams& params,
                    const std::array<std::uint64_t, kAccidentTypeCount>& seeds);

// Feature rows the model consumes for t-windows at the given starts.
FeatureSet model_features(const ForecastModel& model, const TelemetryLog& log, std::span<const std::size_t> starts);

Probabilities predict_proba(const ForecastModel& model, std::span<const double> feature);

struct Alarm {
  std::string well_id;
  Timestamp time;
  AccidentType type;
  double probability;

  bool operator==(const Alarm&) const = default;
};

// Evaluation instants of a streamed log: every multiple of `step` after the
// log start at which a full t-window of history is available.
std::vector<std::size_t> stream_window_starts(const TelemetryLog& log, Duration t_length, Duration step);

struct StreamScores {
  std::vector<Timestamp> times;         // evaluation instant (window end)
  std::vector<Probabilities> probabilities;
};

StreamScores stream_scores(const ForecastModel& model, const TelemetryLog& log, Duration step);

// Alarms of one scored stream at a threshold, in time then type order.
std::vector<Alarm> alarms_at(const StreamScores& scores, const std::string& well_id, double threshold);

std::vector<Alarm> stream_predict(const ForecastModel& model, const TelemetryLog& log, Duration step,
                                  double threshold);

// Columns: well_id,time,accident_type,probability.
void write_alarms_csv(std::span<const Alarm> alarms, const std::filesystem::path& path);

}  // namespace rigcast
