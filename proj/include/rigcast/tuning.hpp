#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rigcast/config.hpp"
#include "rigcast/dwt.hpp"
#include "rigcast/eval.hpp"
#include "rigcast/metrics.hpp"
#include "rigcast/synth.hpp"

namespace rigcast {

// One t-segment of the stage-1 reference sample.
struct SampledSegment {
  std::size_t log = 0;    // index into the corpus logs
  std::size_t start = 0;  // first sample
  SegmentSpan span;
  std::optional<AccidentType> label;  // dominant class; nullopt = normal drilling
};

// `m` t-segments of length t: half normal drilling, half precursor segments
// spread evenly over the accident types present. Candidates sit on a 5 min
// grid; each class is drawn without replacement while candidates last.
// Deterministic given the seed.
std::vector<SampledSegment> sample_reference_segments(std::span<const TelemetryLog> logs,
                                                      std::span<const synth::Annotation> annotations,
                                                      Duration t_length, std::size_t m, std::uint64_t seed);

SimilarityMatrix reference_matrix(std::span<const SampledSegment> segments);

// Histogram rows for the sampled segments.
Matrix segment_histograms(std::span<const TelemetryLog> logs, std::span<const Codebook> codebooks,
                          const WindowConfig& window, std::span<const SampledSegment> segments);
// Raw samples of all channels laid end to end.
Matrix segment_raw_values(std::span<const TelemetryLog> logs, Duration t_length,
                          std::span<const SampledSegment> segments);

struct NScore {
  std::size_t n = 0;
  double rand_index = 0.0;
};

// Clusters the rows into n groups for every n and scores the induced
// similarity matrix against the reference.
std::vector<NScore> rand_index_by_n(const Matrix& rows, const SimilarityMatrix& reference,
                                    std::span<const std::size_t> n_values, std::uint64_t seed);

struct Stage1Row {
  bool baseline = false;  // raw values instead of codeword histograms
  dwt::Family family = dwt::Family::Bior24;
  int level = 0;
  std::size_t k = 0;
  std::size_t best_n = 0;
  double rand_index = 0.0;
  std::string error;  // non-empty when the grid point failed

  bool operator==(const Stage1Row&) const = default;
};

struct Stage1Options {
  std::vector<dwt::Family> families;
  std::vector<int> levels;
  std::vector<std::size_t> ks;
  std::vector<std::size_t> n_values;
  std::size_t segments = 900;
};

// Grid taken from the config; N runs over [stage1_n_min, stage1_n_max].
Stage1Options stage1_options(const PipelineConfig& config);

// Grid points plus one raw-values row, best Rand index first. A failing grid
// point is kept with its error and sorts last.
std::vector<Stage1Row> tune_stage1(std::span<const TelemetryLog> logs, std::span<const synth::Annotation> annotations,
                                   const PipelineConfig& config, const Stage1Options& options);

struct Stage2Cell {
  double tau_minutes = 0.0;
  double t_minutes = 0.0;
  std::optional<MeanStd> macro_auc;  // nullopt when tau exceeds t

  bool operator==(const Stage2Cell&) const = default;
};

// Cross-validated macro AUC for every (tau, t) pair of the config grids,
// tau-major.
std::vector<Stage2Cell> tune_stage2(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                    const PipelineConfig& config);

struct SensitivityPoint {
  std::size_t k = 0;
  std::size_t n = 0;
  MeanStd rand_index;
};

struct SensitivityCurves {
  std::vector<SensitivityPoint> by_n;  // fixed k
  std::vector<SensitivityPoint> by_k;  // fixed n
};

// Rand index against N at `fixed_k` and against K at `fixed_n`, each point
// averaged over `repeats` seeded codebook and clustering runs.
SensitivityCurves sweep_sensitivity(std::span<const TelemetryLog> logs, std::span<const synth::Annotation> annotations,
                                    const PipelineConfig& config, std::size_t fixed_k, std::size_t fixed_n);

struct StepRow {
  double step_minutes = 0.0;
  MeanStd macro_auc;
  double pooled_macro_auc = 0.0;
  MeanStd tpr;
  MeanStd fpr;
};

std::vector<StepRow> sweep_step(std::span<const TelemetryLog> logs, std::span<const AccidentRecord> accidents,
                                const PipelineConfig& config);

// Pairwise Euclidean distances between rows.
Matrix distance_matrix(const Matrix& rows);

void write_stage1_text(std::span<const Stage1Row> rows, std::ostream& out);
void write_stage1_csv(std::span<const Stage1Row> rows, std::ostream& out);
void write_stage2_text(std::span<const Stage2Cell> cells, std::ostream& out);
void write_stage2_csv(std::span<const Stage2Cell> cells, std::ostream& out);
void write_sensitivity_csv(const SensitivityCurves& curves, std::ostream& out);
void write_step_text(std::span<const StepRow> rows, std::ostream& out);
void write_step_csv(std::span<const StepRow> rows, std::ostream& out);
// Columns: segment,well_id,start,class,d0..d{n-1}.
void write_distances_csv(std::span<const SampledSegment> segments, const Matrix& distances, std::ostream& out);

}  // namespace rigcast
