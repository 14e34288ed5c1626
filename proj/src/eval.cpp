#include "rigcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "rigcast/codebook.hpp"
#include "rigcast/error.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

AlarmTally alarm_accounting(std::span<const Alarm> alarms, std::span<const AccidentRecord> accidents,
                            Duration horizon) {
  AlarmTally tally;
  std::vector<char> hit(accidents.size(), 0);
  for (const auto& alarm : alarms) {
    bool true_forecast = false;
    for (std::size_t i = 0; i < accidents.size(); ++i) {
      const auto& a = accidents[i];
      if (a.well_id != alarm.well_id || a.type != alarm.type) continue;
      const auto lead = a.start_time - alarm.time;
      if (lead >= Duration::zero() && lead <= horizon) {
        true_forecast = true;
        hit[i] = 1;
      }
    }
    ++(true_forecast ? tally.true_forecasts : tally.false_alarms);
  }
  for (std::size_t i = 0; i < accidents.size(); ++i) {
    const auto t = index_of(accidents[i].type);
    ++tally.accidents[t];
    ++(hit[i] ? tally.forecasted[t] : tally.missed[t]);
  }
  return tally;
}

namespace {

std::set<AccidentType> types_on(std::span<const AccidentRecord> accidents, const std::set<std::string>& wells) {
  std::set<AccidentType> out;
  for (const auto& a : accidents) {
    if (wells.count(a.well_id)) out.insert(a.type);
  }
  return out;
}

std::size_t draw_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

}  // namespace

std::vector<std::size_t> assign_folds(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                      std::size_t k, std::uint64_t seed, std::size_t max_attempts) {
  const std::size_t n = logs.size();
  if (k < 2) throw ConfigurationError("cross-validation needs at least 2 folds");
  if (n < k) {
    throw ConfigurationError("cannot split " + std::to_string(n) + " wells into " + std::to_string(k) + " folds");
  }
  std::set<std::string> all;
  for (const auto& log : logs) all.insert(log.well_id);
  const auto wanted = types_on(accidents, all);

  Rng rng(derive_seed(seed, "folds"));
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[draw_index(rng, i)]);
    for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % k;

    bool ok = true;
    for (std::size_t f = 0; f < k && ok; ++f) {
      std::set<std::string> train;
      for (std::size_t w = 0; w < n; ++w) {
        if (fold_of[w] != f) train.insert(logs[w].well_id);
      }
      ok = types_on(accidents, train) == wanted;
    }
    if (ok) return fold_of;
  }
  throw ConfigurationError("no fold assignment after " + std::to_string(max_attempts) +
                           " attempts leaves every accident type in every training set");
}

std::vector<TestInterval> test_intervals(const TelemetryLog& log, std::span<const AccidentRecord> accidents,
                                         const PipelineConfig& config, std::uint64_t seed) {
  std::vector<TestInterval> out;
  const Timestamp begin = log.start_time;
  const Timestamp end = log.end_time();
  std::vector<Timestamp> starts_here;
  for (const auto& a : accidents) {
    if (a.well_id != log.well_id || a.start_time <= begin || a.start_time > end) continue;
    starts_here.push_back(a.start_time);
    out.push_back({std::max(begin, a.start_time - config.pre_accident_interval), a.start_time, true});
  }

  std::vector<Timestamp> candidates;
  for (Timestamp s = begin; s + config.normal_interval_length <= end; s += hours(1)) {
    const Timestamp e = s + config.normal_interval_length;
    bool clear = true;
    for (auto a : starts_here) {
      if (!(e + config.normal_clearance <= a || s >= a + config.normal_clearance)) clear = false;
    }
    if (clear) candidates.push_back(s);
  }
  if (!candidates.empty()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < config.normal_intervals; ++i) {
      const Timestamp s = candidates[draw_index(rng, candidates.size())];
      out.push_back({s, s + config.normal_interval_length, false});
    }
  }
  return out;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::BagOfFeatures: return "bag-of-features";
    case Variant::Breakdown: return "breakdown";
    case Variant::PermutedLabels: return "permuted-labels";
  }
  return "?";
}

namespace {

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

// Sample index of a window ending at `end`, streamed over [interval.start, end).
std::vector<std::size_t> interval_starts(const TelemetryLog& log, const TestInterval& iv, Duration t_length,
                                         Duration step) {
  std::vector<std::size_t> out;
  const auto period = log.sample_period.count();
  for (Timestamp e = iv.start + step; e <= iv.end; e += step) {
    const Timestamp s = e - t_length;
    if (s < iv.start) continue;
    const auto offset = (s - log.start_time).count();
    if (offset % period != 0) continue;
    const auto idx = static_cast<std::size_t>(offset / period);
    if (idx + to_samples(t_length, log.sample_period) <= log.length()) out.push_back(idx);
  }
  return out;
}

// Scores of every distinct test window of one fold.
struct ScoredWindows {
  std::vector<SegmentSpan> spans;
  std::vector<LabelVector> labels;
  std::vector<std::vector<Probabilities>> probabilities;  // per variant
  std::vector<std::vector<char>> in_step;                 // per step
};

// Windows of all folds for one (variant, step), in fold order.
struct Pool {
  std::vector<std::vector<double>> scores = std::vector<std::vector<double>>(kAccidentTypeCount);
  std::vector<std::vector<std::uint8_t>> labels = std::vector<std::vector<std::uint8_t>>(kAccidentTypeCount);
  std::vector<double> any_score;
  std::vector<std::uint8_t> any_label;
};

FoldMetrics score_fold(std::size_t fold, std::size_t test_wells, const ScoredWindows& w, std::size_t variant,
                       std::size_t step, double threshold, std::span<const AccidentRecord> test_accidents,
                       Pool& pool) {
  FoldMetrics m;
  m.fold = fold;
  m.test_wells = test_wells;
  std::vector<std::vector<double>> scores(kAccidentTypeCount);
  std::vector<std::vector<std::uint8_t>> labels(kAccidentTypeCount);
  std::vector<double> any_score;
  std::vector<std::uint8_t> any_label;
  std::vector<Alarm> alarms;
  std::size_t normal = 0, normal_alarmed = 0;
  for (std::size_t i = 0; i < w.spans.size(); ++i) {
    if (!w.in_step[step][i]) continue;
    ++m.windows;
    const auto& p = w.probabilities[variant][i];
    bool any = false, alarmed = false;
    for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
      scores[t].push_back(p[t]);
      labels[t].push_back(w.labels[i][t] ? 1 : 0);
      any = any || w.labels[i][t];
      if (p[t] >= threshold) {
        alarms.push_back({w.spans[i].well_id, w.spans[i].end, kAllAccidentTypes[t], p[t]});
        alarmed = true;
      }
    }
    any_score.push_back(*std::max_element(p.begin(), p.end()));
    any_label.push_back(any ? 1 : 0);
    if (!any) {
      ++normal;
      if (alarmed) ++normal_alarmed;
    }
  }

  const auto auc = multiclass_auc(scores, labels);
  m.macro_auc = auc.macro;
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) m.type_auc[t] = auc.per_type[t];
  try {
    m.binary_auc = roc_auc(any_score, any_label);
  } catch (const UndefinedMetricError&) {
  }
  m.alarms = alarm_accounting(alarms, test_accidents);
  const auto total = std::accumulate(m.alarms.accidents.begin(), m.alarms.accidents.end(), std::size_t{0});
  const auto caught = std::accumulate(m.alarms.forecasted.begin(), m.alarms.forecasted.end(), std::size_t{0});
  m.tpr = total ? static_cast<double>(caught) / static_cast<double>(total) : 0.0;
  m.fpr = normal ? static_cast<double>(normal_alarmed) / static_cast<double>(normal) : 0.0;

  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    pool.scores[t].insert(pool.scores[t].end(), scores[t].begin(), scores[t].end());
    pool.labels[t].insert(pool.labels[t].end(), labels[t].begin(), labels[t].end());
  }
  pool.any_score.insert(pool.any_score.end(), any_score.begin(), any_score.end());
  pool.any_label.insert(pool.any_label.end(), any_label.begin(), any_label.end());
  return m;
}

}  // namespace

std::vector<EvalReport> crossval(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                 const PipelineConfig& config, const CrossvalPlan& plan) {
  if (plan.variants.empty()) return {};
  if (config.threshold < 0.0 || config.threshold > 1.0) throw ConfigurationError("threshold must lie in [0, 1]");
  const auto steps = plan.steps.empty() ? std::vector<Duration>{config.inference_step} : plan.steps;
  for (auto s : steps) {
    if (s <= Duration::zero()) throw ConfigurationError("inference step must be positive");
  }
  bool need_bof = false, need_breakdown = false, need_permuted = false;
  for (auto v : plan.variants) {
    need_bof = need_bof || v != Variant::Breakdown;
    need_breakdown = need_breakdown || v == Variant::Breakdown;
    need_permuted = need_permuted || v == Variant::PermutedLabels;
  }

  const std::size_t k = config.crossval_folds;
  const auto fold_of = assign_folds(logs, accidents, k, config.seed);
  std::vector<std::vector<TestInterval>> intervals(logs.size());
  for (std::size_t w = 0; w < logs.size(); ++w) {
    intervals[w] = test_intervals(logs[w], accidents, config, derive_seed(config.seed, "test-intervals", w));
  }

  const std::size_t nv = plan.variants.size();
  const std::size_t ns = steps.size();
  std::vector<EvalReport> reports(nv * ns);
  std::vector<Pool> pools(nv * ns);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t s = 0; s < ns; ++s) {
      reports[v * ns + s].variant = plan.variants[v];
      reports[v * ns + s].step = steps[s];
      reports[v * ns + s].threshold = config.threshold;
    }
  }

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<TelemetryLog> train_logs;
    std::vector<std::size_t> test_idx;
    std::set<std::string> test_wells;
    for (std::size_t w = 0; w < logs.size(); ++w) {
      if (fold_of[w] == f) {
        test_idx.push_back(w);
        test_wells.insert(logs[w].well_id);
      } else {
        train_logs.push_back(logs[w]);
      }
    }
    spdlog::info("fold {}/{}: {} training wells, {} test wells", f + 1, k, train_logs.size(), test_idx.size());

    std::vector<Codebook> codebooks;
    if (need_bof) codebooks = build_codebooks(train_logs, config.codebook_options(derive_seed(config.seed, "fold", f)));

    // Training windows at the regular training step.
    FeatureSet bof_train, breakdown_train;
    bof_train.values = Matrix(0, kChannelCount * config.k);
    breakdown_train.values = Matrix(0, kBreakdownDim);
    for (const auto& log : train_logs) {
      const auto starts = stream_window_starts(log, config.window.t_length, config.window.t_step);
      if (starts.empty()) continue;
      if (need_bof) bof_train.append(featurize_at(log, codebooks, config.window, starts));
      if (need_breakdown) breakdown_train.append(featurize_breakdown_at(log, config.window, starts));
    }
    const auto& train_spans = need_bof ? bof_train.spans : breakdown_train.spans;
    const auto train_labels = label_segments(train_spans, accidents);

    auto boost = config.boosting;
    boost.seed = derive_seed(config.seed, "boost", f);
    std::vector<ForecastModel> models(nv);
    std::optional<ForecastModel> bof_model;
    for (std::size_t v = 0; v < nv; ++v) {
      switch (plan.variants[v]) {
        case Variant::BagOfFeatures:
          if (!bof_model) bof_model = train(bof_train.values, train_labels, boost);
          models[v] = *bof_model;
          break;
        case Variant::Breakdown:
          models[v] = train(breakdown_train.values, train_labels, boost);
          models[v].kind = FeatureKind::Breakdown;
          break;
        case Variant::PermutedLabels: {
          auto shuffled = train_labels;
          Rng rng(derive_seed(config.seed, "permute", f));
          for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[draw_index(rng, i)]);
          models[v] = train(bof_train.values, shuffled, boost);
          break;
        }
      }
    }

    // Distinct test windows of every step, scored once per variant.
    ScoredWindows scored;
    scored.probabilities.resize(nv);
    scored.in_step.resize(ns);
    for (std::size_t w : test_idx) {
      const auto& log = logs[w];
      std::map<std::size_t, std::vector<char>> by_start;
      for (std::size_t s = 0; s < ns; ++s) {
        for (const auto& iv : intervals[w]) {
          for (std::size_t start : interval_starts(log, iv, config.window.t_length, steps[s])) {
            auto& flags = by_start[start];
            flags.resize(ns, 0);
            flags[s] = 1;
          }
        }
      }
      if (by_start.empty()) continue;
      std::vector<std::size_t> starts;
      for (const auto& [start, flags] : by_start) {
        starts.push_back(start);
        for (std::size_t s = 0; s < ns; ++s) scored.in_step[s].push_back(flags[s]);
      }
      FeatureSet bof, breakdown;
      if (need_bof) bof = featurize_at(log, codebooks, config.window, starts);
      if (need_breakdown) breakdown = featurize_breakdown_at(log, config.window, starts);
      const auto& spans = need_bof ? bof.spans : breakdown.spans;
      const auto labels = label_segments(spans, accidents);
      scored.spans.insert(scored.spans.end(), spans.begin(), spans.end());
      scored.labels.insert(scored.labels.end(), labels.begin(), labels.end());
      for (std::size_t v = 0; v < nv; ++v) {
        const auto& x = plan.variants[v] == Variant::Breakdown ? breakdown : bof;
        for (std::size_t i = 0; i < x.size(); ++i) scored.probabilities[v].push_back(predict_proba(models[v], x.values.row(i)));
      }
    }

    std::vector<AccidentRecord> test_accidents;
    for (const auto& a : accidents) {
      if (test_wells.count(a.well_id)) test_accidents.push_back(a);
    }
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t s = 0; s < ns; ++s) {
        reports[v * ns + s].folds.push_back(
            score_fold(f, test_idx.size(), scored, v, s, config.threshold, test_accidents, pools[v * ns + s]));
      }
    }
  }

  for (std::size_t r = 0; r < reports.size(); ++r) {
    auto& rep = reports[r];
    std::vector<double> macro, binary, tpr, fpr;
    for (const auto& m : rep.folds) {
      macro.push_back(m.macro_auc);
      if (m.binary_auc) binary.push_back(*m.binary_auc);
      tpr.push_back(m.tpr);
      fpr.push_back(m.fpr);
    }
    rep.macro_auc = mean_std(macro);
    rep.binary_auc = mean_std(binary);
    rep.tpr = mean_std(tpr);
    rep.fpr = mean_std(fpr);
    rep.pooled_macro_auc = multiclass_auc(pools[r].scores, pools[r].labels).macro;
    try {
      rep.roc = roc_curve(pools[r].any_score, pools[r].any_label);
    } catch (const UndefinedMetricError&) {
    }
  }
  return reports;
}

EvalReport crossval(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                    const PipelineConfig& config) {
  return crossval(logs, accidents, config, CrossvalPlan{}).front();
}

ForecastModel fit_pipeline(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                           const PipelineConfig& config) {
  auto codebooks = build_codebooks(logs, config.codebook_options(derive_seed(config.seed, "codebooks")));
  FeatureSet features;
  features.values = Matrix(0, kChannelCount * config.k);
  for (const auto& log : logs) {
    const auto starts = stream_window_starts(log, config.window.t_length, config.window.t_step);
    if (!starts.empty()) features.append(featurize_at(log, codebooks, config.window, starts));
  }
  auto boost = config.boosting;
  boost.seed = derive_seed(config.seed, "boost");
  auto model = train(features.values, label_segments(features.spans, accidents), boost);
  model.window = config.window;
  model.codebooks = std::move(codebooks);
  return model;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string maybe(const std::optional<double>& v) { return v ? fixed(*v) : std::string("-"); }

}  // namespace

void write_report_text(const EvalReport& report, std::ostream& out) {
  const double step_min = static_cast<double>(report.step.count()) / 60.0;
  out << "variant " << variant_name(report.variant) << ", inference step " << fixed(step_min, 0)
      << " min, threshold " << fixed(report.threshold, 2) << "\n\n";
  out << "fold  wells  windows  macro_auc  binary_auc  tpr     fpr    ";
  for (auto t : kAllAccidentTypes) out << "  " << accident_token(t);
  out << '\n';
  for (const auto& m : report.folds) {
    char head[96];
    std::snprintf(head, sizeof head, "%-4zu  %-5zu  %-7zu  ", m.fold, m.test_wells, m.windows);
    out << head << fixed(m.macro_auc) << "     " << maybe(m.binary_auc) << "      " << fixed(m.tpr) << "  "
        << fixed(m.fpr);
    for (const auto& a : m.type_auc) out << "  " << maybe(a);
    out << '\n';
  }
  out << "\nmacro AUC   " << fixed(report.macro_auc.mean) << " +- " << fixed(report.macro_auc.std) << '\n';
  out << "binary AUC  " << fixed(report.binary_auc.mean) << " +- " << fixed(report.binary_auc.std) << '\n';
  out << "TPR         " << fixed(report.tpr.mean) << " +- " << fixed(report.tpr.std) << '\n';
  out << "FPR         " << fixed(report.fpr.mean) << " +- " << fixed(report.fpr.std) << '\n';
  if (step_min > 0) {
    out << "false alarms per day of normal drilling ~ " << fixed(report.fpr.mean * 1440.0 / step_min, 1) << '\n';
  }
  out << "pooled macro AUC " << fixed(report.pooled_macro_auc) << "\n\nmissed accidents by type\n";
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    std::size_t missed = 0, total = 0;
    for (const auto& m : report.folds) {
      missed += m.alarms.missed[t];
      total += m.alarms.accidents[t];
    }
    out << "  " << accident_name(kAllAccidentTypes[t]) << ": " << missed << " of " << total << '\n';
  }
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "variant,step_min,fold,test_wells,windows,macro_auc,binary_auc,tpr,fpr";
  for (auto t : kAllAccidentTypes) out << ",auc_" << accident_token(t);
  for (auto t : kAllAccidentTypes) out << ",missed_" << accident_token(t);
  for (auto t : kAllAccidentTypes) out << ",accidents_" << accident_token(t);
  out << '\n';
  const std::string prefix =
      std::string(variant_name(report.variant)) + ',' + std::to_string(report.step.count() / 60) + ',';
  for (const auto& m : report.folds) {
    out << prefix << m.fold << ',' << m.test_wells << ',' << m.windows << ',' << fixed(m.macro_auc, 6) << ','
        << (m.binary_auc ? fixed(*m.binary_auc, 6) : "") << ',' << fixed(m.tpr, 6) << ',' << fixed(m.fpr, 6);
    for (const auto& a : m.type_auc) out << ',' << (a ? fixed(*a, 6) : "");
    for (auto v : m.alarms.missed) out << ',' << v;
    for (auto v : m.alarms.accidents) out << ',' << v;
    out << '\n';
  }
  const std::string blanks(3 * kAccidentTypeCount, ',');
  out << prefix << "mean,,," << fixed(report.macro_auc.mean, 6) << ',' << fixed(report.binary_auc.mean, 6) << ','
      << fixed(report.tpr.mean, 6) << ',' << fixed(report.fpr.mean, 6) << blanks << '\n';
  out << prefix << "std,,," << fixed(report.macro_auc.std, 6) << ',' << fixed(report.binary_auc.std, 6) << ','
      << fixed(report.tpr.std, 6) << ',' << fixed(report.fpr.std, 6) << blanks << '\n';
}

void write_roc_csv(std::span<const RocPoint> curve, std::ostream& out) {
  out << "fpr,tpr,threshold\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.fpr, p.tpr, p.threshold);
    out << buf;
  }
}

}  // namespace rigcast
