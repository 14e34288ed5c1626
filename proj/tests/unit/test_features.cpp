#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rigcast/codebook.hpp"
#include "rigcast/dwt.hpp"
#include "rigcast/error.hpp"
#include "rigcast/features.hpp"
#include "rigcast/rng.hpp"
#include "test_helpers.hpp"

using namespace rigcast;

namespace {

TelemetryLog minute_log(std::size_t n, std::uint64_t seed, std::string id = "w") {
  auto log = test::wavy_log(n, seed, std::move(id));
  log.sample_period = Duration{60};
  return log;
}

// Codebooks with random centroids: cheap and good enough for shape checks.
std::vector<Codebook> random_codebooks(std::size_t k, std::uint64_t seed, Duration period = Duration{60}) {
  Rng rng(seed);
  std::vector<Codebook> out;
  for (auto c : kAllChannels) {
    Codebook cb;
    cb.channel = c;
    cb.tau_length = minutes(24);
    cb.tau_step = minutes(24);
    cb.sample_period = period;
    const std::size_t dim = dwt::coefficient_length(to_samples(cb.tau_length, period), cb.wavelet);
    cb.quantizer.centroids = Matrix(k, dim);
    for (auto& v : cb.quantizer.centroids.data()) v = 300.0 * uniform01(rng);
    out.push_back(std::move(cb));
  }
  return out;
}

WindowConfig window_config(int t_min = 72, int step_min = 60) {
  WindowConfig w;
  w.t_length = minutes(t_min);
  w.t_step = minutes(step_min);
  return w;
}

}  // namespace

TEST_CASE("window counts") {
  CHECK(window_count(10, 10, 1) == 1);
  CHECK(window_count(1440, 72, 10) == 137);
  CHECK(window_count(1440, 72, 10) == (1440 - 72) / 10 + 1);
  CHECK(window_count(50, 20, 100) == 1);
  CHECK(window_count(5, 10, 1) == 0);
  const std::vector<double> s(100, 0.0);
  const auto w = windows(s, 30, 25);
  REQUIRE(w.size() == 3);
  CHECK(w[2].data() == s.data() + 50);
  CHECK(windows(s, 101, 1).empty());
}

TEST_CASE("window config validation") {
  WindowConfig w;
  w.tau_length = minutes(80);
  CHECK_THROWS_AS(w.validate(Duration{5}), ConfigurationError);
  WindowConfig ok;
  CHECK_NOTHROW(ok.validate(Duration{5}));
  CHECK_THROWS_AS(ok.validate(Duration{7}), ConfigurationError);
}

TEST_CASE("histogram of identical windows fills one bin") {
  const auto cbs = random_codebooks(20, 1);
  const std::vector<double> seg(72, 120.0);
  const auto h = histogram(cbs[0], seg, 24);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 3.0);
  CHECK(*std::max_element(h.begin(), h.end()) == 3.0);
  CHECK(std::count(h.begin(), h.end(), 0.0) == 19);
  CHECK_THROWS_AS(histogram(cbs[0], std::vector<double>(10, 1.0), 24), ShapeError);
}

TEST_CASE("alternating regimes split the histogram") {
  // Two centroids built from the two regime patterns themselves.
  std::vector<double> flat(24, 50.0), wave(24);
  for (std::size_t i = 0; i < 24; ++i) wave[i] = 50.0 + 30.0 * std::sin(1.3 * static_cast<double>(i));
  Codebook cb;
  cb.tau_length = minutes(24);
  cb.sample_period = Duration{60};
  cb.quantizer.centroids = Matrix(2, dwt::coefficient_length(24, cb.wavelet));
  const auto cf = dwt::decompose(flat, cb.wavelet), cw = dwt::decompose(wave, cb.wavelet);
  std::copy(cf.begin(), cf.end(), cb.quantizer.centroids.row(0).begin());
  std::copy(cw.begin(), cw.end(), cb.quantizer.centroids.row(1).begin());

  std::vector<double> t_seg;
  for (int w = 0; w < 10; ++w) {
    const auto& src = w % 2 ? wave : flat;
    t_seg.insert(t_seg.end(), src.begin(), src.end());
  }
  const auto h = histogram(cb, t_seg, 24);
  CHECK(h[0] == 5.0);
  CHECK(h[1] == 5.0);
}

TEST_CASE("feature dimension is channels times K") {
  const auto log = minute_log(600, 2);
  const auto f = featurize(log, random_codebooks(200, 3), window_config());
  CHECK(f.values.cols() == 2200);
  CHECK(f.size() == window_count(600, 72, 60));
}

TEST_CASE("every channel block sums to the tau-window count") {
  const std::size_t k = 15;
  const auto cbs = random_codebooks(k, 4);
  for (int t_min : {24, 50, 72, 100}) {
    const auto log = minute_log(500, 5);
    const auto cfg = window_config(t_min, 17);
    const auto f = featurize(log, cbs, cfg);
    const double expected = static_cast<double>((t_min - 24) / 24 + 1);
    for (std::size_t r = 0; r < f.size(); ++r) {
      const auto row = f.values.row(r);
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          const double v = row[c * k + j];
          CHECK(v >= 0.0);
          CHECK(v == std::floor(v));
          s += v;
        }
        CHECK(s == expected);
      }
    }
  }
}

TEST_CASE("featurize equals slicing and per-channel histograms") {
  const std::size_t k = 12;
  const auto cbs = random_codebooks(k, 6);
  const auto log = minute_log(400, 7);
  const auto cfg = window_config(72, 30);
  const auto f = featurize(log, cbs, cfg);
  REQUIRE(f.size() == window_count(400, 72, 30));
  for (std::size_t r = 0; r < f.size(); ++r) {
    const std::size_t start = r * 30;
    CHECK(f.spans[r].start == log.time_at(start));
    CHECK(f.spans[r].end == log.time_at(start + 72));
    CHECK(f.spans[r].well_id == log.well_id);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto h = histogram(cbs[c], log.channel(kAllChannels[c]).subspan(start, 72), 24);
      for (std::size_t j = 0; j < k; ++j) CHECK(f.values(r, c * k + j) == h[j]);
    }
  }
}

TEST_CASE("featurize edge cases") {
  const auto cbs = random_codebooks(5, 8);
  CHECK(featurize(minute_log(60, 9), cbs, window_config()).size() == 0);
  const auto a = featurize(minute_log(300, 10), cbs, window_config());
  const auto b = featurize(minute_log(300, 10), cbs, window_config());
  CHECK(a.values == b.values);

  auto missing = cbs;
  missing.pop_back();
  CHECK_THROWS_AS(featurize(minute_log(300, 10), missing, window_config()), ConfigurationError);
  auto wrong = cbs;
  std::swap(wrong[0], wrong[1]);
  CHECK_THROWS_AS(featurize(minute_log(300, 10), wrong, window_config()), ConfigurationError);
}

TEST_CASE("well order does not change feature vectors") {
  const auto cbs = random_codebooks(9, 11);
  std::vector<TelemetryLog> logs = {minute_log(300, 1, "a"), minute_log(250, 2, "b"), minute_log(410, 3, "c")};
  auto features_of = [&](const std::vector<TelemetryLog>& ls) {
    std::map<std::pair<std::string, std::int64_t>, std::vector<double>> out;
    for (const auto& log : ls) {
      const auto f = featurize(log, cbs, window_config());
      for (std::size_t r = 0; r < f.size(); ++r) {
        const auto row = f.values.row(r);
        out[{f.spans[r].well_id, f.spans[r].start.time_since_epoch().count()}] = {row.begin(), row.end()};
      }
    }
    return out;
  };
  const auto forward = features_of(logs);
  std::reverse(logs.begin(), logs.end());
  CHECK(features_of(logs) == forward);
}

TEST_CASE("featurize at arbitrary starts") {
  const auto cbs = random_codebooks(7, 12);
  const auto log = minute_log(300, 13);
  const std::vector<std::size_t> starts = {100, 3, 3, 228};
  const auto f = featurize_at(log, cbs, window_config(), starts);
  const auto all = featurize(log, cbs, WindowConfig{minutes(72), minutes(1), minutes(24), minutes(24)});
  REQUIRE(f.size() == 4);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    for (std::size_t j = 0; j < f.values.cols(); ++j) CHECK(f.values(i, j) == all.values(starts[i], j));
  }
  const std::vector<std::size_t> bad = {229};
  CHECK_THROWS_AS(featurize_at(log, cbs, window_config(), bad), ShapeError);
}

TEST_CASE("breakdown statistics") {
  std::vector<std::vector<double>> data(kChannelCount, std::vector<double>(60, 7.0));
  for (std::size_t i = 0; i < 60; ++i) data[1][i] = static_cast<double>(i);
  Rng rng(14);
  for (auto& v : data[2]) v = 100.0 * uniform01(rng) - 30.0;
  std::vector<std::span<const double>> segs(data.begin(), data.end());
  const auto f = breakdown_features(segs, Duration{5});
  REQUIRE(f.size() == 66);
  CHECK(kBreakdownDim == 66);

  // Constant channel.
  CHECK(f[0] == 7.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
  CHECK(f[5] == 0.0);
  // Ramp value = i at 5 s per sample rises 12 units per minute.
  CHECK(f[6 + 2] == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(f[6 + 3] == 0.0);
  CHECK(f[6 + 4] == 59.0);
  CHECK(f[6 + 5] == 59.0);
  // Random channel against a two-pass oracle.
  double mean = 0.0;
  for (double v : data[2]) mean += v;
  mean /= 60.0;
  double ss = 0.0;
  for (double v : data[2]) ss += (v - mean) * (v - mean);
  CHECK(std::abs(f[12] - mean) < 1e-12);
  CHECK(std::abs(f[13] - std::sqrt(ss / 60.0)) < 1e-12);
  CHECK(f[15] == *std::min_element(data[2].begin(), data[2].end()));
  CHECK(f[16] == *std::max_element(data[2].begin(), data[2].end()));
  CHECK(f[17] == data[2].back() - data[2].front());

  segs.pop_back();
  CHECK_THROWS_AS(breakdown_features(segs, Duration{5}), ShapeError);
}

TEST_CASE("breakdown featurizer follows the window starts") {
  const auto log = minute_log(300, 15);
  const std::vector<std::size_t> starts = {0, 50};
  const auto f = featurize_breakdown_at(log, window_config(), starts);
  REQUIRE(f.size() == 2);
  CHECK(f.values.cols() == kBreakdownDim);
  std::vector<std::span<const double>> segs;
  for (auto c : kAllChannels) segs.push_back(log.channel(c).subspan(50, 72));
  const auto direct = breakdown_features(segs, log.sample_period);
  for (std::size_t j = 0; j < kBreakdownDim; ++j) CHECK(f.values(1, j) == direct[j]);
}
