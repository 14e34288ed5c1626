#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "rigcast/codebook.hpp"
#include "rigcast/error.hpp"
#include "rigcast/features.hpp"
#include "rigcast/synth.hpp"
#include "small_corpus.hpp"
#include "test_helpers.hpp"

using namespace rigcast;
using namespace rigcast::synth;

namespace {

ScenarioConfig quiet(std::size_t wells, std::uint64_t seed) {
  ScenarioConfig s;
  s.n_wells = wells;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("one well without accidents") {
  const auto c = generate_corpus(quiet(1, 3));
  REQUIRE(c.logs.size() == 1);
  CHECK(c.accidents.empty());
  CHECK(c.annotations.empty());
  CHECK(c.logs[0].length() == 48 * 720);
  CHECK(c.logs[0].well_id == well_name(0));
}

TEST_CASE("generation is deterministic") {
  auto s = quiet(3, 5);
  s.schedule = {{1, AccidentType::Packing, hours(30)}};
  const auto a = generate_corpus(s);
  const auto b = generate_corpus(s);
  CHECK(a.logs == b.logs);
  CHECK(a.accidents == b.accidents);
  CHECK(a.annotations == b.annotations);
}

TEST_CASE("values stay inside the channel ranges") {
  const auto& corpus = test::small_corpus();
  const auto& specs = canonical_specs();
  for (const auto& log : corpus.logs) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      for (double v : log.channels[c]) REQUIRE(specs[c].contains(v));
    }
    CHECK(clean(log) == log);
  }
}

TEST_CASE("default scenario shape") {
  const auto s = default_scenario();
  CHECK(s.n_wells == 60);
  CHECK(s.seed == 7);
  REQUIRE(s.schedule.size() == 42);
  std::array<int, kAccidentTypeCount> per_type{};
  std::set<std::size_t> wells;
  for (const auto& a : s.schedule) {
    ++per_type[index_of(a.type)];
    wells.insert(a.well);
    CHECK(a.start_offset >= hours(30));
  }
  for (int n : per_type) CHECK(n == 7);
  CHECK(wells.size() == 42);
}

TEST_CASE("every accident has an annotated precursor within six hours") {
  const auto& corpus = test::small_corpus();
  for (const auto& a : corpus.accidents) {
    bool found = false;
    for (const auto& n : corpus.annotations) {
      if (n.well_id != a.well_id || n.type != a.type) continue;
      CHECK(n.end <= a.start_time);
      CHECK(n.start >= a.start_time - hours(6));
      CHECK(n.start < n.end);
      found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("stuck precursors show repeated hook-load excursions") {
  auto s = quiet(1, 9);
  const auto base = generate_corpus(s);
  s.schedule = {{0, AccidentType::Stuck, hours(40)}};
  const auto with = generate_corpus(s);
  const auto& hk = with.logs[0].channel(Channel::HKLA);
  const auto& ref = base.logs[0].channel(Channel::HKLA);
  const double limit = 5.0 * s.noise_std[index_of(Channel::HKLA)];

  REQUIRE(!with.annotations.empty());
  const auto& note = with.annotations[0];
  const auto begin = static_cast<std::size_t>((note.start - with.logs[0].start_time) / Duration{5});
  const auto end = static_cast<std::size_t>((note.end - with.logs[0].start_time) / Duration{5});
  int excursions = 0;
  bool inside = false;
  for (std::size_t i = 0; i < hk.size(); ++i) {
    const bool out = std::abs(hk[i] - ref[i]) > limit;
    if (i < begin || i >= end) {
      // Outside the precursor region the two corpora agree exactly.
      REQUIRE(hk[i] == ref[i]);
      continue;
    }
    if (out && !inside) ++excursions;
    inside = out;
  }
  CHECK(excursions >= 3);
}

TEST_CASE("schedules need a day of history") {
  auto s = quiet(2, 1);
  s.schedule = {{0, AccidentType::Stuck, hours(23)}};
  CHECK_THROWS_AS(generate_corpus(s), ConfigurationError);
  s.schedule = {{5, AccidentType::Stuck, hours(30)}};
  CHECK_THROWS_AS(generate_corpus(s), ConfigurationError);
  s.schedule = {{0, AccidentType::Stuck, hours(49)}};
  CHECK_THROWS_AS(generate_corpus(s), ConfigurationError);
}

TEST_CASE("dominant class and reference similarity") {
  const auto t = test::t0();
  const std::vector<Annotation> notes = {
      {"w", Channel::HKLA, t + hours(1), t + hours(2), AccidentType::Stuck},
      {"w", Channel::SPPA, t + hours(1), t + hours(2), AccidentType::MudLoss},
      {"w", Channel::TVT, t + hours(1), t + hours(2), AccidentType::MudLoss},
  };
  auto span = [&](int from_min, int to_min, std::string well = "w") {
    return SegmentSpan{std::move(well), t + minutes(from_min), t + minutes(to_min)};
  };
  CHECK_FALSE(dominant_class(notes, span(0, 30)).has_value());
  CHECK_FALSE(dominant_class(notes, span(0, 100)).has_value());  // 40 of 100 minutes
  CHECK_FALSE(dominant_class(notes, span(70, 80, "v")).has_value());
  // Overlapping channels of one region count once; ties go to the first type.
  CHECK(dominant_class(notes, span(70, 80)) == AccidentType::Stuck);
  CHECK(dominant_class(notes, span(30, 90)) == AccidentType::Stuck);

  const std::vector<SegmentSpan> spans = {span(0, 30), span(200, 260), span(65, 90), span(70, 110)};
  const auto m = reference_similarity(notes, spans);
  CHECK(m.at(0, 1));
  CHECK(m.at(2, 3));
  CHECK_FALSE(m.at(0, 2));
  CHECK(m.symmetric());
}

TEST_CASE("annotation files round trip") {
  const auto& corpus = test::small_corpus();
  const auto path = std::filesystem::temp_directory_path() / "rigcast_annotations.csv";
  write_annotations(corpus.annotations, path);
  CHECK(load_annotations(path) == corpus.annotations);
  std::filesystem::remove(path);
}

TEST_CASE("normal drilling looks alike across seeds") {
  // Wells are the independent units: each contributes its mean histogram.
  // A permutation test on the summed standardized squared mean gaps then
  // checks that the two seeds share a location.
  const auto a = generate_corpus(quiet(12, 101));
  const auto b = generate_corpus(quiet(12, 202));
  CodebookOptions o;
  o.k = 10;
  const auto cbs = build_codebooks(a.logs, o);
  const WindowConfig w;
  Matrix wells(0, kChannelCount * o.k);
  for (const auto* c : {&a, &b}) {
    for (const auto& log : c->logs) {
      const auto f = featurize(log, cbs, w);
      std::vector<double> mean(f.values.cols(), 0.0);
      for (std::size_t r = 0; r < f.size(); ++r) {
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += f.values(r, j) / static_cast<double>(f.size());
      }
      wells.append_row(mean);
    }
  }
  const std::size_t n = wells.rows(), half = n / 2;
  std::vector<double> scale(wells.cols(), 0.0);
  for (std::size_t j = 0; j < wells.cols(); ++j) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += wells(i, j) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v += (wells(i, j) - m) * (wells(i, j) - m);
    scale[j] = v > 0.0 ? 1.0 / v : 0.0;
  }
  auto statistic = [&](const std::vector<std::size_t>& order) {
    double s = 0.0;
    for (std::size_t j = 0; j < wells.cols(); ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += (i < half ? 1.0 : -1.0) * wells(order[i], j);
      s += d * d * scale[j];
    }
    return s;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double observed = statistic(order);
  Rng rng(3);
  const int permutations = 2000;
  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    at_least += statistic(order) >= observed;
  }
  const double p_value = (1.0 + at_least) / (1.0 + permutations);
  CHECK(p_value > 0.01);
}
