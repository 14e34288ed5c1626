#include "rigcast/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <spdlog/spdlog.h>

#include "rigcast/codebook.hpp"
#include "rigcast/error.hpp"
#include "rigcast/kmeans.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

namespace {

constexpr Duration kCandidateGrid = minutes(5);

std::size_t draw_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

// Draws `count` items, without replacement while the pool lasts.
void draw_from(std::vector<SampledSegment> pool, std::size_t count, Rng& rng, std::vector<SampledSegment>& out) {
  if (pool.empty()) return;
  std::size_t left = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (left == 0) left = pool.size();
    const std::size_t j = draw_index(rng, left);
    out.push_back(pool[j]);
    std::swap(pool[j], pool[left - 1]);
    --left;
  }
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string class_token(const std::optional<AccidentType>& c) {
  return c ? std::string(accident_token(*c)) : std::string("normal");
}

std::string row_name(const Stage1Row& r) {
  if (r.baseline) return "raw values";
  return std::string(dwt::family_name(r.family)) + " L" + std::to_string(r.level) + " K" + std::to_string(r.k);
}

}  // namespace

std::vector<SampledSegment> sample_reference_segments(std::span<const TelemetryLog> logs,
                                                      std::span<const synth::Annotation> annotations,
                                                      Duration t_length, std::size_t m, std::uint64_t seed) {
  std::vector<SampledSegment> normal;
  std::array<std::vector<SampledSegment>, kAccidentTypeCount> precursor;
  for (std::size_t w = 0; w < logs.size(); ++w) {
    const auto& log = logs[w];
    const std::size_t len = to_samples(t_length, log.sample_period);
    const std::size_t grid = to_samples(kCandidateGrid, log.sample_period);
    for (std::size_t s = 0; s + len <= log.length(); s += grid) {
      SampledSegment seg{w, s, {log.well_id, log.time_at(s), log.time_at(s + len)}, std::nullopt};
      seg.label = synth::dominant_class(annotations, seg.span);
      if (seg.label) {
        precursor[index_of(*seg.label)].push_back(std::move(seg));
      } else {
        normal.push_back(std::move(seg));
      }
    }
  }

  std::vector<std::size_t> present;
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    if (!precursor[t].empty()) present.push_back(t);
  }
  Rng rng(derive_seed(seed, "reference-sample"));
  std::vector<SampledSegment> out;
  out.reserve(m);
  const std::size_t half = present.empty() ? 0 : m / 2;
  for (std::size_t i = 0; i < present.size(); ++i) {
    // Spread the remainder over the first types.
    const std::size_t share = half / present.size() + (i < half % present.size() ? 1 : 0);
    draw_from(precursor[present[i]], share, rng, out);
  }
  draw_from(std::move(normal), m - out.size(), rng, out);
  return out;
}

SimilarityMatrix reference_matrix(std::span<const SampledSegment> segments) {
  std::vector<int> cls(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    cls[i] = segments[i].label ? static_cast<int>(index_of(*segments[i].label)) : -1;
  }
  return SimilarityMatrix::from_labels<int>(cls);
}

Matrix segment_histograms(std::span<const TelemetryLog> logs, std::span<const Codebook> codebooks,
                          const WindowConfig& window, std::span<const SampledSegment> segments) {
  std::map<std::size_t, std::vector<std::size_t>> by_log;
  for (std::size_t i = 0; i < segments.size(); ++i) by_log[segments[i].log].push_back(i);
  Matrix out;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  for (const auto& [w, idx] : by_log) {
    std::vector<std::size_t> starts;
    for (auto i : idx) starts.push_back(segments[i].start);
    const auto f = featurize_at(logs[w], codebooks, window, starts);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto row = f.values.row(r);
      rows.emplace_back(idx[r], std::vector<double>(row.begin(), row.end()));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [i, row] : rows) out.append_row(row);
  return out;
}

Matrix segment_raw_values(std::span<const TelemetryLog> logs, Duration t_length,
                          std::span<const SampledSegment> segments) {
  Matrix out;
  std::vector<double> row;
  for (const auto& s : segments) {
    const auto& log = logs[s.log];
    const std::size_t len = to_samples(t_length, log.sample_period);
    row.clear();
    for (auto c : kAllChannels) {
      const auto v = log.channel(c).subspan(s.start, len);
      row.insert(row.end(), v.begin(), v.end());
    }
    out.append_row(row);
  }
  return out;
}

std::vector<NScore> rand_index_by_n(const Matrix& rows, const SimilarityMatrix& reference,
                                    std::span<const std::size_t> n_values, std::uint64_t seed) {
  std::vector<NScore> out;
  for (auto n : n_values) {
    if (n == 0 || n > rows.rows()) continue;
    KMeansOptions o;
    o.seed = derive_seed(seed, "segment-clusters", n);
    o.max_iter = 100;
    o.tol = 1e-6;
    const auto model = fit_kmeans(rows, n, o);
    std::vector<std::size_t> labels(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) labels[i] = model.nearest(rows.row(i));
    out.push_back({n, rand_index(reference, SimilarityMatrix::from_labels<std::size_t>(labels))});
  }
  return out;
}

Stage1Options stage1_options(const PipelineConfig& config) {
  Stage1Options o;
  o.families = config.stage1_families;
  o.levels = config.stage1_levels;
  o.ks = config.stage1_ks;
  for (auto n = config.stage1_n_min; n <= config.stage1_n_max; ++n) o.n_values.push_back(n);
  o.segments = config.stage1_segments;
  return o;
}

namespace {

Stage1Row best_of(Stage1Row row, const std::vector<NScore>& scores) {
  for (const auto& s : scores) {
    if (row.best_n == 0 || s.rand_index > row.rand_index) {
      row.best_n = s.n;
      row.rand_index = s.rand_index;
    }
  }
  if (scores.empty()) row.error = "no admissible cluster count";
  return row;
}

}  // namespace

std::vector<Stage1Row> tune_stage1(std::span<const TelemetryLog> logs, std::span<const synth::Annotation> annotations,
                                   const PipelineConfig& config, const Stage1Options& options) {
  const auto segments =
      sample_reference_segments(logs, annotations, config.window.t_length, options.segments, config.seed);
  const auto reference = reference_matrix(segments);

  std::vector<Stage1Row> rows;
  for (auto family : options.families) {
    for (int level : options.levels) {
      for (auto k : options.ks) {
        Stage1Row row;
        row.family = family;
        row.level = level;
        row.k = k;
        spdlog::info("stage 1: {}", row_name(row));
        try {
          PipelineConfig c = config;
          c.wavelet = {family, level};
          c.k = k;
          const auto codebooks = build_codebooks(logs, c.codebook_options(derive_seed(config.seed, "stage1")));
          const auto h = segment_histograms(logs, codebooks, c.window, segments);
          row = best_of(row, rand_index_by_n(h, reference, options.n_values, config.seed));
        } catch (const Error& e) {
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }

  Stage1Row base;
  base.baseline = true;
  spdlog::info("stage 1: raw values");
  try {
    const auto raw = segment_raw_values(logs, config.window.t_length, segments);
    base = best_of(base, rand_index_by_n(raw, reference, options.n_values, config.seed));
  } catch (const Error& e) {
    base.error = e.what();
  }
  rows.push_back(std::move(base));

  std::stable_sort(rows.begin(), rows.end(), [](const Stage1Row& a, const Stage1Row& b) {
    if (a.error.empty() != b.error.empty()) return a.error.empty();
    return a.rand_index > b.rand_index;
  });
  return rows;
}

std::vector<Stage2Cell> tune_stage2(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                    const PipelineConfig& config) {
  std::vector<Stage2Cell> cells;
  for (double tau : config.stage2_tau_minutes) {
    for (double t : config.stage2_t_minutes) {
      Stage2Cell cell{tau, t, std::nullopt};
      if (tau <= t) {
        spdlog::info("stage 2: tau {} min, t {} min", tau, t);
        PipelineConfig c = config;
        c.window.tau_length = minutes(tau);
        c.window.tau_step = minutes(tau);
        c.codebook_tau_step = minutes(tau);
        c.window.t_length = minutes(t);
        cell.macro_auc = crossval(logs, accidents, c).macro_auc;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

SensitivityCurves sweep_sensitivity(std::span<const TelemetryLog> logs, std::span<const synth::Annotation> annotations,
                                    const PipelineConfig& config, std::size_t fixed_k, std::size_t fixed_n) {
  if (config.sensitivity_repeats < 2) throw ConfigurationError("sensitivity sweeps need at least two repeats");
  const auto segments =
      sample_reference_segments(logs, annotations, config.window.t_length, config.stage1_segments, config.seed);
  const auto reference = reference_matrix(segments);
  const std::size_t repeats = config.sensitivity_repeats;

  auto histograms = [&](std::size_t k, std::size_t r) {
    PipelineConfig c = config;
    c.k = k;
    const auto codebooks = build_codebooks(logs, c.codebook_options(derive_seed(config.seed, "sensitivity", r)));
    return segment_histograms(logs, codebooks, c.window, segments);
  };

  SensitivityCurves out;
  // by N: one codebook set per repeat, every N clustered on it.
  std::vector<std::vector<double>> by_n(config.sensitivity_ns.size());
  for (std::size_t r = 0; r < repeats; ++r) {
    spdlog::info("sensitivity: K {} repeat {}", fixed_k, r + 1);
    const auto h = histograms(fixed_k, r);
    const auto scores = rand_index_by_n(h, reference, config.sensitivity_ns, derive_seed(config.seed, "repeat", r));
    for (std::size_t i = 0; i < config.sensitivity_ns.size(); ++i) {
      for (const auto& s : scores) {
        if (s.n == config.sensitivity_ns[i]) by_n[i].push_back(s.rand_index);
      }
    }
  }
  for (std::size_t i = 0; i < config.sensitivity_ns.size(); ++i) {
    if (!by_n[i].empty()) out.by_n.push_back({fixed_k, config.sensitivity_ns[i], mean_std(by_n[i])});
  }

  const std::size_t n_one[] = {fixed_n};
  for (auto k : config.sensitivity_ks) {
    std::vector<double> v;
    for (std::size_t r = 0; r < repeats; ++r) {
      spdlog::info("sensitivity: K {} repeat {}", k, r + 1);
      const auto h = histograms(k, r);
      for (const auto& s : rand_index_by_n(h, reference, n_one, derive_seed(config.seed, "repeat", r))) {
        v.push_back(s.rand_index);
      }
    }
    if (!v.empty()) out.by_k.push_back({k, fixed_n, mean_std(v)});
  }
  return out;
}

std::vector<StepRow> sweep_step(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                const PipelineConfig& config) {
  CrossvalPlan plan;
  for (double m : config.step_minutes) plan.steps.push_back(minutes(m));
  const auto reports = crossval(logs, accidents, config, plan);
  std::vector<StepRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    rows.push_back({config.step_minutes[i], r.macro_auc, r.pooled_macro_auc, r.tpr, r.fpr});
  }
  return rows;
}

Matrix distance_matrix(const Matrix& rows) {
  const std::size_t n = rows.rows();
  Matrix d(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : std::sqrt(squared_distance(rows.row(i), rows.row(j)));
  });
  return d;
}

void write_stage1_text(std::span<const Stage1Row> rows, std::ostream& out) {
  out << "rank  parameters               best N  Rand index\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    char line[160];
    const auto name = row_name(r);
    if (r.error.empty()) {
      std::snprintf(line, sizeof line, "%4zu  %-24s %6zu  %.4f\n", ++rank, name.c_str(), r.best_n, r.rand_index);
    } else {
      std::snprintf(line, sizeof line, "   -  %-24s failed: %s\n", name.c_str(), r.error.c_str());
    }
    out << line;
  }
}

void write_stage1_csv(std::span<const Stage1Row> rows, std::ostream& out) {
  out << "rank,family,level,k,best_n,rand_index,error\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    out << (r.error.empty() ? std::to_string(++rank) : std::string()) << ','
        << (r.baseline ? std::string("raw") : std::string(dwt::family_name(r.family))) << ','
        << (r.baseline ? std::string() : std::to_string(r.level)) << ','
        << (r.baseline ? std::string() : std::to_string(r.k)) << ',' << r.best_n << ','
        << (r.error.empty() ? fixed(r.rand_index, 6) : std::string()) << ',';
    std::string e = r.error;
    std::replace(e.begin(), e.end(), ',', ';');
    out << e << '\n';
  }
}

void write_stage2_text(std::span<const Stage2Cell> cells, std::ostream& out) {
  std::vector<double> taus, ts;
  for (const auto& c : cells) {
    if (std::find(taus.begin(), taus.end(), c.tau_minutes) == taus.end()) taus.push_back(c.tau_minutes);
    if (std::find(ts.begin(), ts.end(), c.t_minutes) == ts.end()) ts.push_back(c.t_minutes);
  }
  out << "macro ROC AUC (rows: tau min, columns: t min)\n";
  out << "tau \\ t";
  for (double t : ts) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%16g", t);
    out << buf;
  }
  out << '\n';
  for (double tau : taus) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7g", tau);
    out << buf;
    for (double t : ts) {
      std::string cell = "undefined";
      for (const auto& c : cells) {
        if (c.tau_minutes == tau && c.t_minutes == t && c.macro_auc) {
          cell = fixed(c.macro_auc->mean, 3) + " +- " + fixed(c.macro_auc->std, 3);
        }
      }
      std::snprintf(buf, sizeof buf, "%16s", cell.c_str());
      out << buf;
    }
    out << '\n';
  }
}

void write_stage2_csv(std::span<const Stage2Cell> cells, std::ostream& out) {
  out << "tau_min,t_min,macro_auc,macro_auc_std\n";
  for (const auto& c : cells) {
    out << c.tau_minutes << ',' << c.t_minutes << ',';
    if (c.macro_auc) {
      out << fixed(c.macro_auc->mean, 6) << ',' << fixed(c.macro_auc->std, 6);
    } else {
      out << "undefined,";
    }
    out << '\n';
  }
}

void write_sensitivity_csv(const SensitivityCurves& curves, std::ostream& out) {
  out << "curve,k,n,rand_index_mean,rand_index_std\n";
  for (const auto& p : curves.by_n) {
    out << "by_n," << p.k << ',' << p.n << ',' << fixed(p.rand_index.mean, 6) << ',' << fixed(p.rand_index.std, 6)
        << '\n';
  }
  for (const auto& p : curves.by_k) {
    out << "by_k," << p.k << ',' << p.n << ',' << fixed(p.rand_index.mean, 6) << ',' << fixed(p.rand_index.std, 6)
        << '\n';
  }
}

void write_step_text(std::span<const StepRow> rows, std::ostream& out) {
  out << "step min  macro AUC          pooled  TPR     FPR\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%8g  %.4f +- %.4f  %.4f  %.4f  %.4f\n", r.step_minutes, r.macro_auc.mean,
                  r.macro_auc.std, r.pooled_macro_auc, r.tpr.mean, r.fpr.mean);
    out << line;
  }
}

void write_step_csv(std::span<const StepRow> rows, std::ostream& out) {
  out << "step_min,macro_auc,macro_auc_std,pooled_macro_auc,tpr,fpr\n";
  for (const auto& r : rows) {
    out << r.step_minutes << ',' << fixed(r.macro_auc.mean, 6) << ',' << fixed(r.macro_auc.std, 6) << ','
        << fixed(r.pooled_macro_auc, 6) << ',' << fixed(r.tpr.mean, 6) << ',' << fixed(r.fpr.mean, 6) << '\n';
  }
}

void write_distances_csv(std::span<const SampledSegment> segments, const Matrix& distances, std::ostream& out) {
  out << "segment,well_id,start,class";
  for (std::size_t j = 0; j < distances.cols(); ++j) out << ",d" << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out << i << ',' << segments[i].span.well_id << ',' << format_time(segments[i].span.start) << ','
        << class_token(segments[i].label);
    for (std::size_t j = 0; j < distances.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", distances(i, j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace rigcast
