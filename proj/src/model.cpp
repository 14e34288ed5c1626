#include "rigcast/model.hpp"

#include <fstream>
#include <iomanip>

#include "rigcast/error.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

std::vector<LabelVector> label_segments(std::span<const SegmentSpan> segments,
                                        std::span<const AccidentRecord> accidents, Duration horizon) {
  std::vector<LabelVector> out(segments.size(), LabelVector{});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (const auto& a : accidents) {
      if (a.well_id != segments[i].well_id) continue;
      const auto lead = a.start_time - segments[i].end;
      if (lead >= Duration::zero() && lead <= horizon) out[i][index_of(a.type)] = true;
    }
  }
  return out;
}

std::array<std::uint64_t, kAccidentTypeCount> type_seeds(const BoostingParams& params) {
  std::array<std::uint64_t, kAccidentTypeCount> seeds{};
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) seeds[t] = derive_seed(params.seed, "accident-type", t);
  return seeds;
}

ForecastModel train(const Matrix& features, std::span<const LabelVector> labels, const BoostingParams& params) {
  return train(features, labels, params, type_seeds(params));
}

ForecastModel train(const Matrix& features, std::span<const LabelVector> labels, const BoostingParams& params,
                    const std::array<std::uint64_t, kAccidentTypeCount>& seeds) {
  if (labels.size() != features.rows()) throw ShapeError("label count does not match feature rows");
  std::array<std::vector<std::uint8_t>, kAccidentTypeCount> y;
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    y[t].resize(labels.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      y[t][i] = labels[i][t] ? 1 : 0;
      pos += y[t][i];
    }
    const std::string name(accident_name(kAllAccidentTypes[t]));
    if (pos == 0) throw TrainingError("no positive training segments for accident type " + name);
    if (pos == labels.size()) throw TrainingError("no negative training segments for accident type " + name);
  }

  ForecastModel model;
  model.feature_dim = features.cols();
  model.params = params;
  const SortedColumns columns(features);
  parallel_for(kAccidentTypeCount, [&](std::size_t t) {
    auto p = params;
    p.seed = seeds[t];
    model.ensembles[t] = fit_boosted_ensemble(features, columns, y[t], p);
  });
  return model;
}

FeatureSet model_features(const ForecastModel& model, const TelemetryLog& log, std::span<const std::size_t> starts) {
  if (model.kind == FeatureKind::Breakdown) return featurize_breakdown_at(log, model.window, starts);
  return featurize_at(log, model.codebooks, model.window, starts);
}

Probabilities predict_proba(const ForecastModel& model, std::span<const double> feature) {
  if (feature.size() != model.feature_dim) {
    throw ShapeError("feature vector has dimension " + std::to_string(feature.size()) + ", model expects " +
                     std::to_string(model.feature_dim));
  }
  Probabilities p{};
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) p[t] = model.ensembles[t].probability(feature);
  return p;
}

std::vector<std::size_t> stream_window_starts(const TelemetryLog& log, Duration t_length, Duration step) {
  const std::size_t t_len = to_samples(t_length, log.sample_period);
  const std::size_t s = to_samples(step, log.sample_period);
  if (s == 0) throw ConfigurationError("stream step must be positive");
  std::vector<std::size_t> starts;
  for (std::size_t end = s; end <= log.length(); end += s) {
    if (end >= t_len) starts.push_back(end - t_len);
  }
  return starts;
}

StreamScores stream_scores(const ForecastModel& model, const TelemetryLog& log, Duration step) {
  const auto starts = stream_window_starts(log, model.window.t_length, step);
  StreamScores out;
  if (starts.empty()) return out;
  const auto features = model_features(model, log, starts);
  out.times.reserve(starts.size());
  out.probabilities.reserve(starts.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.times.push_back(features.spans[i].end);
    out.probabilities.push_back(predict_proba(model, features.values.row(i)));
  }
  return out;
}

std::vector<Alarm> alarms_at(const StreamScores& scores, const std::string& well_id, double threshold) {
  std::vector<Alarm> out;
  for (std::size_t i = 0; i < scores.times.size(); ++i) {
    for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
      if (scores.probabilities[i][t] >= threshold) {
        out.push_back({well_id, scores.times[i], kAllAccidentTypes[t], scores.probabilities[i][t]});
      }
    }
  }
  return out;
}

std::vector<Alarm> stream_predict(const ForecastModel& model, const TelemetryLog& log, Duration step,
                                  double threshold) {
  if (threshold < 0.0 || threshold > 1.0) throw ConfigurationError("threshold must lie in [0, 1]");
  return alarms_at(stream_scores(model, log, step), log.well_id, threshold);
}

void write_alarms_csv(std::span<const Alarm> alarms, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << "well_id,time,accident_type,probability\n" << std::setprecision(17);
  for (const auto& a : alarms) {
    f << a.well_id << ',' << format_time(a.time) << ',' << accident_token(a.type) << ',' << a.probability << '\n';
  }
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace rigcast
