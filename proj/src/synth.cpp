#include "rigcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "rigcast/error.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"

namespace rigcast::synth {

namespace {

constexpr double kBlockWeight = 22.0;  // tons hanging from the hook with the string in slips
constexpr double kStandLength = 28.0;  // meters

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

double string_weight(double bit_depth) { return 72.0 + 0.001 * bit_depth; }

// Noise-free drilling program for one well: a sequence of operations (drilling
// with connections, circulating, reaming, tripping out and back in) written
// sample by sample.
class BaselineWriter {
 public:
  BaselineWriter(TelemetryLog& log, std::size_t n, Rng& rng) : log_(log), n_(n), rng_(rng) {
    for (auto& ch : log_.channels) ch.reserve(n);
    hole_ = uniform(rng_, 1000.0, 5000.0);
    bit_ = hole_;
    block_ = uniform(rng_, 5.0, 25.0);
    tank_ = uniform(rng_, 145.0, 155.0);
    dt_ = static_cast<double>(log_.sample_period.count());
  }

  void run() {
    while (!full()) {
      const double u = uniform01(rng_);
      if (u < 0.40) drill(minutes_to_samples(uniform(rng_, 40, 150)));
      else if (u < 0.55) circulate(minutes_to_samples(uniform(rng_, 20, 60)));
      else if (u < 0.70) ream(minutes_to_samples(uniform(rng_, 20, 60)));
      else trip(uniform_index(rng_, 4, 12));
    }
  }

 private:
  struct Sample {
    double hkla, bpos, tqa, wob, rpma, sppa, mfia, gasa;
  };

  bool full() const { return log_.length() >= n_; }
  std::size_t minutes_to_samples(double m) const { return static_cast<std::size_t>(m * 60.0 / dt_); }

  void emit(const Sample& s) {
    if (full()) return;
    // Mud transfers: occasional tank volume steps unrelated to the well.
    if (transfer_left_ > 0) {
      tank_ += transfer_rate_;
      --transfer_left_;
    } else if (uniform01(rng_) < 1.0 / 2500.0) {
      transfer_left_ = minutes_to_samples(uniform(rng_, 5, 12));
      transfer_rate_ = uniform(rng_, -3.0, 3.0) / static_cast<double>(transfer_left_);
    }
    tank_ += uniform(rng_, -0.01, 0.01);
    tank_ = std::clamp(tank_, 60.0, 220.0);
    gas_ *= 0.985;

    auto& c = log_.channels;
    c[index_of(Channel::HKLA)].push_back(s.hkla);
    c[index_of(Channel::BPOS)].push_back(s.bpos);
    c[index_of(Channel::DBTM)].push_back(bit_);
    c[index_of(Channel::DMEA)].push_back(hole_);
    c[index_of(Channel::TQA)].push_back(s.tqa);
    c[index_of(Channel::WOB)].push_back(s.wob);
    c[index_of(Channel::RPMA)].push_back(s.rpma);
    c[index_of(Channel::SPPA)].push_back(s.sppa);
    c[index_of(Channel::MFIA)].push_back(s.mfia);
    c[index_of(Channel::TVT)].push_back(tank_);
    c[index_of(Channel::GASA)].push_back(background_gas_ + gas_ + s.gasa);
  }

  double pressure(double flow) const { return 0.05 * flow * flow + 0.002 * bit_ + 24.0; }

  void drill(std::size_t samples) {
    const double rop = uniform(rng_, 6.0, 25.0) / 3600.0;  // m/s
    const double flow = uniform(rng_, 39.0, 41.0);
    const double rpm = uniform(rng_, 90.0, 110.0);
    const double wob = uniform(rng_, 9.0, 11.0);
    bit_ = hole_;
    for (std::size_t i = 0; i < samples && !full(); ++i) {
      if (block_ < 2.0) {
        connection();
        continue;
      }
      const double phase = static_cast<double>(i) * dt_ / 300.0;
      const double w = wob + 0.8 * std::sin(phase);
      hole_ += rop * dt_;
      bit_ = hole_;
      block_ -= rop * dt_;
      emit({string_weight(bit_) - w, block_, 4.0 + 0.6 * w + 0.02 * rpm, w, rpm, pressure(flow), flow, 0.0});
    }
  }

  void connection() {
    const std::size_t samples = minutes_to_samples(uniform(rng_, 4.0, 6.0));
    const std::size_t lift = samples / 3;
    const double start = block_;
    for (std::size_t i = 0; i < samples && !full(); ++i) {
      block_ = i < lift ? start + (kStandLength - start) * static_cast<double>(i + 1) / static_cast<double>(lift)
                        : kStandLength;
      emit({kBlockWeight, block_, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    // Connection gas arrives once circulation resumes.
    gas_ += uniform(rng_, 0.01, 0.04);
  }

  void circulate(std::size_t samples) {
    const double flow = uniform(rng_, 34.0, 36.0);
    const double rpm = uniform01(rng_) < 0.5 ? 0.0 : uniform(rng_, 30.0, 60.0);
    bit_ = std::max(0.0, hole_ - uniform(rng_, 2.0, 10.0));
    for (std::size_t i = 0; i < samples && !full(); ++i) {
      emit({string_weight(bit_), block_, rpm > 0 ? 3.0 + 0.03 * rpm : 0.0, 0.0, rpm, pressure(flow), flow, 0.0});
    }
  }

  void ream(std::size_t samples) {
    const double flow = uniform(rng_, 36.0, 38.0);
    const double rpm = uniform(rng_, 50.0, 90.0);
    const double period = uniform(rng_, 8.0, 14.0) * 60.0 / dt_;
    const double drag = uniform(rng_, 2.0, 5.0);
    const double top = hole_;
    for (std::size_t i = 0; i < samples && !full(); ++i) {
      const double phase = std::fmod(static_cast<double>(i) / period, 1.0);
      const double tri = phase < 0.5 ? 2.0 * phase : 2.0 - 2.0 * phase;  // 0 -> 1 -> 0
      const double up = phase < 0.5 ? 1.0 : -1.0;
      block_ = 3.0 + 22.0 * tri;
      bit_ = std::max(0.0, top - 22.0 * tri);
      emit({string_weight(bit_) + up * drag, block_, 6.0 + 0.04 * rpm + 1.5 * tri, 0.0, rpm, pressure(flow), flow, 0.0});
    }
  }

  void trip(std::size_t stands) {
    stands = std::min<std::size_t>(stands, static_cast<std::size_t>(std::max(0.0, bit_ - 100.0) / kStandLength));
    const double drag = uniform(rng_, 1.0, 4.0);
    const std::size_t pull = minutes_to_samples(uniform(rng_, 1.2, 2.0));
    const std::size_t slips = minutes_to_samples(uniform(rng_, 0.8, 1.5));
    // Out of the hole.
    for (std::size_t s = 0; s < stands && !full(); ++s) {
      const double bit0 = bit_;
      for (std::size_t i = 0; i < pull && !full(); ++i) {
        const double f = static_cast<double>(i + 1) / static_cast<double>(pull);
        block_ = 2.0 + (kStandLength - 2.0) * f;
        bit_ = bit0 - kStandLength * f;
        emit({string_weight(bit_) + drag, block_, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
      }
      for (std::size_t i = 0; i < slips && !full(); ++i) {
        block_ = kStandLength - (kStandLength - 2.0) * static_cast<double>(i + 1) / static_cast<double>(slips);
        emit({kBlockWeight, block_, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
      }
    }
    // Back in.
    for (std::size_t s = 0; s < stands && !full(); ++s) {
      for (std::size_t i = 0; i < slips && !full(); ++i) {
        block_ = 2.0 + (kStandLength - 2.0) * static_cast<double>(i + 1) / static_cast<double>(slips);
        emit({kBlockWeight, block_, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
      }
      const double bit0 = bit_;
      for (std::size_t i = 0; i < pull && !full(); ++i) {
        const double f = static_cast<double>(i + 1) / static_cast<double>(pull);
        block_ = kStandLength - (kStandLength - 2.0) * f;
        bit_ = std::min(hole_, bit0 + kStandLength * f);
        emit({string_weight(bit_) - 0.5 * drag, block_, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
      }
    }
  }

  TelemetryLog& log_;
  std::size_t n_;
  Rng& rng_;
  double hole_ = 0, bit_ = 0, block_ = 0, tank_ = 0, dt_ = 5;
  double gas_ = 0.0;
  double background_gas_ = 0.02;
  std::size_t transfer_left_ = 0;
  double transfer_rate_ = 0.0;
};

// Smooth excursion of normal drilling: a one-sided bump lasting a quarter
// of an hour or so, rising quickly and easing back or the reverse.
struct Motif {
  Channel channel;
  std::size_t at;
  std::size_t width;
  double peak;  // in channel amplitudes
  bool sharp_start = false;
};

// Hourly motif rates are drawn from [kMotifRateMin, kMotifRateMax] per channel.
constexpr double kMotifRateMin = 1.0;
constexpr double kMotifRateMax = 2.5;
constexpr std::array kMotifChannels = {Channel::HKLA, Channel::TQA, Channel::SPPA, Channel::TVT, Channel::GASA};

std::size_t minute_samples(Duration period) { return static_cast<std::size_t>(60 / period.count()); }

std::vector<Motif> draw_motifs(std::size_t n, Duration period, Rng& rng) {
  const std::size_t per_minute = std::max<std::size_t>(1, minute_samples(period));
  const std::size_t hour = 60 * per_minute;
  std::vector<Motif> out;
  for (auto c : kMotifChannels) {
    for (std::size_t h0 = 0; h0 < n; h0 += hour) {
      const double rate = uniform(rng, kMotifRateMin, kMotifRateMax);
      const auto count = static_cast<std::size_t>(rate + uniform01(rng));
      const double sign = uniform01(rng) < 0.5 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < count; ++j) {
        Motif m{c, h0 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hour)),
                static_cast<std::size_t>(uniform(rng, 12.0, 24.0) * static_cast<double>(per_minute)),
                sign * uniform(rng, 2.0, 4.0), uniform01(rng) < 0.5};
        out.push_back(m);
      }
    }
  }
  return out;
}

// Rises over the first sixth of the width and returns linearly over the
// rest, or the same shape reversed in time.
void render(const Motif& m, std::vector<double>& delta, double amplitude) {
  const std::size_t rise = std::max<std::size_t>(1, m.width / 6);
  for (std::size_t k = 0; k < m.width; ++k) {
    const double v = k < rise ? static_cast<double>(k + 1) / static_cast<double>(rise)
                              : static_cast<double>(m.width - k) / static_cast<double>(m.width - rise + 1);
    const std::size_t i = m.sharp_start ? m.at + k : m.at + m.width - 1 - k;
    if (i < delta.size()) delta[i] += m.peak * v * amplitude;
  }
}

// Sustained oscillation on one channel. Normal operations produce slow
// swings; precursor regions carry faster ones of the same height, so window
// summaries such as mean, spread and range barely move while the shape does.
constexpr double kSwingRate = 0.5;         // normal episodes per channel-hour
constexpr double kSwingMinutes = 15.0;     // cycle of a normal swing
constexpr double kPrecursorMinutes = 5.0;  // cycle inside a precursor region
constexpr double kPrecursorGap = 15.0;     // longest pause between precursor episodes, minutes

struct Episode {
  Channel channel;
  std::size_t at;
  std::size_t length;
  double period;  // samples per cycle
  double phase;
  double peak;  // in channel amplitudes
};

void render(const Episode& e, std::vector<double>& delta, double amplitude) {
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t k = 0; k < e.length; ++k) {
    const std::size_t i = e.at + k;
    if (i < delta.size()) delta[i] += e.peak * amplitude * std::sin(kTwoPi * (static_cast<double>(k) / e.period + e.phase));
  }
}

double cycle_samples(double minutes_per_cycle, Duration period, Rng& rng) {
  return minutes_per_cycle * uniform(rng, 0.97, 1.03) * 60.0 / static_cast<double>(period.count());
}

Episode draw_episode(Channel c, std::size_t at, std::size_t length, double minutes_per_cycle, Duration period, Rng& rng) {
  return {c, at, length, cycle_samples(minutes_per_cycle, period, rng), uniform01(rng), uniform(rng, 2.0, 4.0)};
}

std::vector<Episode> draw_episodes(std::size_t n, Duration period, Rng& rng) {
  const std::size_t per_minute = std::max<std::size_t>(1, minute_samples(period));
  const std::size_t hour = 60 * per_minute;
  std::vector<Episode> out;
  for (auto c : kMotifChannels) {
    for (std::size_t h0 = 0; h0 < n; h0 += hour) {
      if (uniform01(rng) >= kSwingRate) continue;
      const auto at = h0 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hour));
      const auto len = static_cast<std::size_t>(uniform(rng, 20.0, 40.0) * static_cast<double>(per_minute));
      out.push_back(draw_episode(c, at, len, kSwingMinutes, period, rng));
    }
  }
  return out;
}

std::vector<Channel> precursor_channels(AccidentType type) {
  switch (type) {
    case AccidentType::Stuck: return {Channel::HKLA};
    case AccidentType::WashoutOfDrillingPipe: return {Channel::SPPA};
    case AccidentType::MudLoss: return {Channel::SPPA, Channel::TVT};
    case AccidentType::BreakOfDrillingPipe: return {Channel::TQA, Channel::HKLA};
    case AccidentType::FluidShow: return {Channel::GASA, Channel::TVT};
    case AccidentType::Packing: return {Channel::TQA, Channel::SPPA};
  }
  return {};
}

// Cuts the part of every episode on channel c that falls inside [begin, end).
void clear_region(std::vector<Episode>& episodes, Channel c, std::size_t begin, std::size_t end) {
  std::vector<Episode> out;
  for (const auto& e : episodes) {
    if (e.channel != c || e.at + e.length <= begin || e.at >= end) {
      out.push_back(e);
      continue;
    }
    if (e.at < begin) {
      auto head = e;
      head.length = begin - e.at;
      out.push_back(head);
    }
    if (e.at + e.length > end) {
      auto tail = e;
      const std::size_t skip = end - e.at;
      tail.at = end;
      tail.length = e.length - skip;
      tail.phase += static_cast<double>(skip) / e.period;
      out.push_back(tail);
    }
  }
  episodes = std::move(out);
}

void precursor_episodes(Channel c, std::size_t begin, std::size_t end, Duration period, std::vector<Episode>& out,
                        Rng& rng) {
  const double per_minute = static_cast<double>(std::max<std::size_t>(1, minute_samples(period)));
  const double gap = kPrecursorGap;
  std::size_t at = begin + static_cast<std::size_t>(uniform(rng, 0.0, gap) * per_minute);
  while (at < end) {
    auto len = static_cast<std::size_t>(uniform(rng, 20.0, 40.0) * per_minute);
    len = std::min(len, end - at);
    out.push_back(draw_episode(c, at, len, kPrecursorMinutes, period, rng));
    at += len + static_cast<std::size_t>(uniform(rng, 5.0, gap) * per_minute);
  }
}

}  // namespace

std::string well_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "well_%03zu", index);
  return buf;
}

std::vector<ScheduledAccident> balanced_schedule(std::size_t n_wells, double hours_per_well, std::size_t per_type,
                                                 std::uint64_t seed) {
  const std::size_t total = per_type * kAccidentTypeCount;
  if (total > n_wells) throw ConfigurationError("more accidents than wells in the balanced schedule");
  if (hours_per_well < 31.0) throw ConfigurationError("balanced schedule needs wells of at least 31 h");
  Rng rng(derive_seed(seed, "schedule"));
  std::vector<std::size_t> wells(n_wells);
  std::iota(wells.begin(), wells.end(), 0);
  std::shuffle(wells.begin(), wells.end(), rng);
  std::vector<ScheduledAccident> out;
  for (std::size_t i = 0; i < total; ++i) {
    const double offset_h = uniform(rng, 30.0, hours_per_well - 1.0);
    out.push_back({wells[i], kAllAccidentTypes[i % kAccidentTypeCount], minutes(std::round(offset_h * 60.0))});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.well < b.well; });
  return out;
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.schedule = balanced_schedule(c.n_wells, c.hours_per_well, 7, c.seed);
  return c;
}

Corpus generate_corpus(const ScenarioConfig& config) {
  const auto period = config.sample_period;
  const auto n = static_cast<std::size_t>(config.hours_per_well * 3600.0 / static_cast<double>(period.count()));
  const Duration span = period * static_cast<std::int64_t>(n);
  for (const auto& a : config.schedule) {
    if (a.well >= config.n_wells) throw ConfigurationError("accident scheduled on unknown well " + std::to_string(a.well));
    if (a.start_offset < hours(24)) {
      throw ConfigurationError("accident on " + well_name(a.well) + " leaves less than 24 h of prior log");
    }
    if (a.start_offset >= span) throw ConfigurationError("accident on " + well_name(a.well) + " starts after its log ends");
  }

  Corpus corpus;
  corpus.logs.resize(config.n_wells);
  std::vector<std::vector<Annotation>> notes(config.n_wells);
  parallel_for(config.n_wells, [&](std::size_t w) {
    auto& log = corpus.logs[w];
    log.well_id = well_name(w);
    log.sample_period = period;
    log.start_time = config.epoch + hours(24.0 * 30.0 * static_cast<double>(w % 12));

    Rng base_rng(derive_seed(config.seed, "baseline", w));
    BaselineWriter(log, n, base_rng).run();

    std::array<std::vector<double>, kChannelCount> delta;
    for (auto& d : delta) d.assign(n, 0.0);
    std::array<double, kChannelCount> amplitude;
    for (std::size_t c = 0; c < kChannelCount; ++c) amplitude[c] = config.pattern_amplitude * config.noise_std[c];

    Rng motif_rng(derive_seed(config.seed, "motifs", w));
    const auto motifs = draw_motifs(n, period, motif_rng);
    auto episodes = draw_episodes(n, period, motif_rng);
    std::vector<Episode> extra;
    std::size_t k = 0;
    for (const auto& a : config.schedule) {
      if (a.well != w) continue;
      Rng pattern_rng(derive_seed(config.seed, "pattern", w * 1000 + k++));
      const std::size_t end = to_samples(a.start_offset - a.start_offset % period, period);
      const Duration lead = hours(6) - minutes(uniform(pattern_rng, 0.0, 30.0));
      const std::size_t begin = end - to_samples(lead - lead % period, period);
      for (auto c : precursor_channels(a.type)) {
        // Slow swings inside the region give way to the precursor.
        clear_region(episodes, c, begin, end);
        precursor_episodes(c, begin, end, period, extra, pattern_rng);
        notes[w].push_back({log.well_id, c, log.time_at(begin), log.time_at(end), a.type});
      }
    }
    episodes.insert(episodes.end(), extra.begin(), extra.end());
    for (const auto& m : motifs) render(m, delta[index_of(m.channel)], amplitude[index_of(m.channel)]);
    for (const auto& e : episodes) render(e, delta[index_of(e.channel)], amplitude[index_of(e.channel)]);

    Rng noise_rng(derive_seed(config.seed, "noise", w));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto& specs = canonical_specs();
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      auto& series = log.channels[c];
      for (std::size_t i = 0; i < n; ++i) {
        const double v = series[i] + delta[c][i] + config.noise_std[c] * gauss(noise_rng);
        series[i] = std::clamp(v, specs[c].min_value, specs[c].max_value);
      }
    }
  });

  for (const auto& a : config.schedule) {
    corpus.accidents.push_back({well_name(a.well), a.type, corpus.logs[a.well].start_time + a.start_offset});
  }
  for (auto& v : notes) corpus.annotations.insert(corpus.annotations.end(), v.begin(), v.end());
  return corpus;
}

std::optional<AccidentType> dominant_class(std::span<const Annotation> annotations, const SegmentSpan& span) {
  // Channels of one accident share a region, so coverage is measured per
  // distinct (type, region) pair.
  std::map<std::tuple<int, Timestamp, Timestamp>, bool> seen;
  std::array<std::int64_t, kAccidentTypeCount> cover{};
  for (const auto& a : annotations) {
    if (a.well_id != span.well_id) continue;
    const auto key = std::make_tuple(static_cast<int>(a.type), a.start, a.end);
    if (seen[key]) continue;
    seen[key] = true;
    const auto lo = std::max(a.start, span.start);
    const auto hi = std::min(a.end, span.end);
    if (hi > lo) cover[index_of(a.type)] += (hi - lo).count();
  }
  const auto best = std::max_element(cover.begin(), cover.end());
  const auto len = (span.end - span.start).count();
  if (*best * 2 < len || *best == 0) return std::nullopt;
  return kAllAccidentTypes[static_cast<std::size_t>(best - cover.begin())];
}

SimilarityMatrix reference_similarity(std::span<const Annotation> annotations, std::span<const SegmentSpan> segments) {
  std::vector<int> cls(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto d = dominant_class(annotations, segments[i]);
    cls[i] = d ? static_cast<int>(index_of(*d)) : -1;
  }
  return SimilarityMatrix::from_labels<int>(cls);
}

void write_annotations(std::span<const Annotation> annotations, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << "well_id,channel,start,end,pattern_type\n";
  for (const auto& a : annotations) {
    f << a.well_id << ',' << channel_name(a.channel) << ',' << format_time(a.start) << ',' << format_time(a.end)
      << ',' << accident_token(a.type) << '\n';
  }
  if (!f) throw IoError("failed writing " + path.string());
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(f, line);
  if (line.rfind("well_id,channel,start,end,pattern_type", 0) != 0) {
    throw SchemaError("annotation file has an unexpected header", "well_id");
  }
  std::vector<Annotation> out;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw FormatError("annotation row has " + std::to_string(cells.size()) + " cells");
    const auto ch = parse_channel(cells[1]);
    if (!ch) throw ParseError("unknown channel '" + cells[1] + "'", cells[1]);
    out.push_back({cells[0], *ch, parse_time(cells[2]), parse_time(cells[3]), parse_accident_type(cells[4])});
  }
  return out;
}

}  // namespace rigcast::synth
