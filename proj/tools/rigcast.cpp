// rigcast command-line front end.
//
// Corpus directories hold logs/<well>.csv, reference.csv and, for synthetic
// corpora, annotations.csv.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rigcast/artifact.hpp"
#include "rigcast/config.hpp"
#include "rigcast/error.hpp"
#include "rigcast/eval.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"
#include "rigcast/synth.hpp"
#include "rigcast/tuning.hpp"

namespace fs = std::filesystem;
using namespace rigcast;

namespace {

struct Corpus {
  std::vector<TelemetryLog> logs;
  std::vector<AccidentRecord> accidents;
  std::vector<synth::Annotation> annotations;
};

PipelineConfig config_from(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

std::vector<fs::path> log_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw ValidationError("no logs directory at " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Logs come back cleaned against the config's channel ranges.
Corpus load_corpus(const fs::path& dir, const PipelineConfig& config, bool need_annotations = false) {
  Corpus c;
  for (const auto& f : log_files(dir / "logs")) c.logs.push_back(clean(load_log(f, config.specs), config.specs));
  c.accidents = load_reference(dir / "reference.csv");
  const auto ann = dir / "annotations.csv";
  if (fs::exists(ann)) {
    c.annotations = synth::load_annotations(ann);
  } else if (need_annotations) {
    throw ValidationError("this command needs " + ann.string() + " (written by `rigcast synth`)");
  }
  spdlog::info("loaded {} logs, {} accidents from {}", c.logs.size(), c.accidents.size(), dir.string());
  return c;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void cmd_synth(const std::string& config_path, const fs::path& out) {
  const auto config = config_from(config_path);
  const auto corpus = synth::generate_corpus(config.scenario());
  ensure_dir(out / "logs");
  for (const auto& log : corpus.logs) write_log(log, out / "logs" / (log.well_id + ".csv"));
  write_reference(corpus.accidents, out / "reference.csv");
  synth::write_annotations(corpus.annotations, out / "annotations.csv");
  std::cout << "wrote " << corpus.logs.size() << " logs, " << corpus.accidents.size() << " accidents and "
            << corpus.annotations.size() << " annotations to " << out.string() << '\n';
}

void cmd_clean(const std::string& config_path, const fs::path& in, const fs::path& out) {
  const auto config = config_from(config_path);
  if (fs::is_directory(in)) {
    ensure_dir(out / "logs");
    for (const auto& f : log_files(in / "logs")) {
      write_log(clean(load_log(f, config.specs), config.specs), out / "logs" / f.filename());
    }
    for (const char* name : {"reference.csv", "annotations.csv"}) {
      if (fs::exists(in / name)) fs::copy_file(in / name, out / name, fs::copy_options::overwrite_existing);
    }
  } else {
    write_log(clean(load_log(in, config.specs), config.specs), out);
  }
}

void cmd_train(const std::string& config_path, const fs::path& corpus_dir, const fs::path& out) {
  const auto config = config_from(config_path);
  const auto corpus = load_corpus(corpus_dir, config);
  ModelArtifact artifact{config, fit_pipeline(corpus.logs, corpus.accidents, config)};
  save_artifact(artifact, out);
  std::cout << "model with " << artifact.model.feature_dim << " features saved to " << out.string() << '\n';
}

void cmd_predict(const fs::path& model_path, const fs::path& log_path, const fs::path& out, double step_min,
                 double threshold) {
  const auto artifact = load_artifact(model_path);
  const auto& config = artifact.config;
  const auto log = clean(load_log(log_path, config.specs), config.specs);
  const Duration step = step_min > 0.0 ? minutes(step_min) : config.inference_step;
  if (threshold < 0.0) threshold = config.threshold;
  if (threshold > 1.0) throw ValidationError("threshold must lie in [0, 1]");
  const auto scores = stream_scores(artifact.model, log, step);
  const auto alarms = alarms_at(scores, log.well_id, threshold);
  write_alarms_csv(alarms, out);

  std::cout << log.well_id << ": " << scores.times.size() << " evaluations, " << alarms.size() << " alarms\n";
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    double best = 0.0;
    for (const auto& p : scores.probabilities) best = std::max(best, p[t]);
    char line[96];
    std::snprintf(line, sizeof line, "  %-22s max probability %.4f\n",
                  std::string(accident_name(kAllAccidentTypes[t])).c_str(), best);
    std::cout << line;
  }
}

Variant parse_variant(const std::string& name) {
  for (auto v : {Variant::BagOfFeatures, Variant::Breakdown, Variant::PermutedLabels}) {
    if (variant_name(v) == name) return v;
  }
  throw ValidationError("unknown variant '" + name + "'");
}

void cmd_evaluate(const std::string& config_path, const fs::path& corpus_dir, const fs::path& out,
                  const std::vector<std::string>& variants, const std::vector<double>& steps) {
  const auto config = config_from(config_path);
  const auto corpus = load_corpus(corpus_dir, config);
  CrossvalPlan plan;
  plan.variants.clear();
  for (const auto& v : variants) plan.variants.push_back(parse_variant(v));
  for (double s : steps) plan.steps.push_back(minutes(s));
  const auto reports = crossval(corpus.logs, corpus.accidents, config, plan);
  ensure_dir(out);
  for (const auto& r : reports) {
    const auto stem = std::string(variant_name(r.variant)) + "_step" + std::to_string(r.step.count() / 60);
    write_report_text(r, std::cout);
    std::cout << '\n';
    auto txt = open_out(out / (stem + ".txt"));
    write_report_text(r, txt);
    auto csv = open_out(out / (stem + ".csv"));
    write_report_csv(r, csv);
    auto roc = open_out(out / (stem + "_roc.csv"));
    write_roc_csv(r.roc, roc);
  }
}

void cmd_tune(const std::string& mode, const std::string& config_path, const fs::path& corpus_dir,
              const fs::path& out, std::size_t fixed_k, std::size_t fixed_n) {
  const auto config = config_from(config_path);
  ensure_dir(out);
  if (mode == "stage1") {
    const auto corpus = load_corpus(corpus_dir, config, true);
    const auto rows = tune_stage1(corpus.logs, corpus.annotations, config, stage1_options(config));
    write_stage1_text(rows, std::cout);
    auto txt = open_out(out / "stage1.txt");
    write_stage1_text(rows, txt);
    auto csv = open_out(out / "stage1.csv");
    write_stage1_csv(rows, csv);
  } else if (mode == "stage2") {
    const auto corpus = load_corpus(corpus_dir, config);
    const auto cells = tune_stage2(corpus.logs, corpus.accidents, config);
    write_stage2_text(cells, std::cout);
    auto txt = open_out(out / "stage2.txt");
    write_stage2_text(cells, txt);
    auto csv = open_out(out / "stage2.csv");
    write_stage2_csv(cells, csv);
  } else if (mode == "sensitivity") {
    const auto corpus = load_corpus(corpus_dir, config, true);
    const auto curves = sweep_sensitivity(corpus.logs, corpus.annotations, config, fixed_k ? fixed_k : config.k,
                                          fixed_n ? fixed_n : 7);
    write_sensitivity_csv(curves, std::cout);
    auto csv = open_out(out / "sensitivity.csv");
    write_sensitivity_csv(curves, csv);
  } else if (mode == "step") {
    const auto corpus = load_corpus(corpus_dir, config);
    const auto rows = sweep_step(corpus.logs, corpus.accidents, config);
    write_step_text(rows, std::cout);
    auto txt = open_out(out / "step.txt");
    write_step_text(rows, txt);
    auto csv = open_out(out / "step.csv");
    write_step_csv(rows, csv);
  } else {
    throw ValidationError("unknown tuning mode '" + mode + "'");
  }
}

void cmd_export_distances(const std::string& config_path, const fs::path& corpus_dir, const fs::path& out,
                          bool raw) {
  const auto config = config_from(config_path);
  const auto corpus = load_corpus(corpus_dir, config, true);
  const auto segments = sample_reference_segments(corpus.logs, corpus.annotations, config.window.t_length,
                                                  config.stage1_segments, config.seed);
  Matrix rows;
  if (raw) {
    rows = segment_raw_values(corpus.logs, config.window.t_length, segments);
  } else {
    const auto codebooks = build_codebooks(corpus.logs, config.codebook_options(derive_seed(config.seed, "codebooks")));
    rows = segment_histograms(corpus.logs, codebooks, config.window, segments);
  }
  auto f = open_out(out);
  write_distances_csv(segments, distance_matrix(rows), f);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("rigcast");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  const char* level = std::getenv("RIGCAST_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Drilling accident forecasting from mud-log telemetry"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("-j,--jobs", jobs, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key=value config file; defaults when omitted")
      ->check(CLI::ExistingFile);

  std::string corpus, out, in, model, log_path, mode;
  double step = 0.0, threshold = -1.0;
  bool raw = false;
  std::size_t fixed_k = 0, fixed_n = 0;
  std::vector<std::string> variants{"bag-of-features"};
  std::vector<double> steps;

  auto* synth = app.add_subcommand("synth", "write the synthetic corpus");
  synth->add_option("out", out, "output corpus directory")->required();

  auto* clean_cmd = app.add_subcommand("clean", "repair missing and out-of-range samples");
  clean_cmd->add_option("input", in, "log CSV or corpus directory")->required()->check(CLI::ExistingPath);
  clean_cmd->add_option("output", out, "cleaned log CSV or corpus directory")->required();

  auto* train_cmd = app.add_subcommand("train", "build codebooks and models, save an artifact");
  train_cmd->add_option("corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("-o,--out", out, "artifact path")->required();

  auto* predict = app.add_subcommand("predict", "stream a log through a trained model");
  predict->add_option("model", model, "artifact path")->required()->check(CLI::ExistingFile);
  predict->add_option("log", log_path, "telemetry CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("-o,--out", out, "alarm CSV")->required();
  predict->add_option("--step", step, "minutes between evaluations (default from the artifact config)");
  predict->add_option("--threshold", threshold, "alarm threshold (default from the artifact config)");

  auto* evaluate = app.add_subcommand("evaluate", "well-based cross-validation");
  evaluate->add_option("corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("-o,--out", out, "report directory")->required();
  evaluate->add_option("--variants", variants, "bag-of-features, breakdown, permuted-labels")->delimiter(',');
  evaluate->add_option("--steps", steps, "inference steps in minutes (default from the config)")->delimiter(',');

  auto* tune = app.add_subcommand("tune", "hyperparameter sweeps");
  tune->add_option("mode", mode, "stage1, stage2, sensitivity or step")
      ->required()
      ->check(CLI::IsMember({"stage1", "stage2", "sensitivity", "step"}));
  tune->add_option("corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  tune->add_option("-o,--out", out, "report directory")->required();
  tune->add_option("--k", fixed_k, "sensitivity: K held fixed while N varies (default codebook.k)");
  tune->add_option("--n", fixed_n, "sensitivity: N held fixed while K varies (default 7)");

  auto* dist = app.add_subcommand("export-distances", "pairwise distances of the reference segments");
  dist->add_option("corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  dist->add_option("-o,--out", out, "distance CSV")->required();
  dist->add_flag("--raw", raw, "use raw values instead of codeword histograms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  set_jobs(jobs);

  try {
    if (*synth) cmd_synth(config_path, out);
    if (*clean_cmd) cmd_clean(config_path, in, out);
    if (*train_cmd) cmd_train(config_path, corpus, out);
    if (*predict) cmd_predict(model, log_path, out, step, threshold);
    if (*evaluate) cmd_evaluate(config_path, corpus, out, variants, steps);
    if (*tune) cmd_tune(mode, config_path, corpus, out, fixed_k, fixed_n);
    if (*dist) cmd_export_distances(config_path, corpus, out, raw);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
