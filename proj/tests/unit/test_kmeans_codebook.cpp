#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rigcast/codebook.hpp"
#include "rigcast/dwt.hpp"
#include "rigcast/error.hpp"
#include "rigcast/kmeans.hpp"
#include "rigcast/rng.hpp"
#include "test_helpers.hpp"

using namespace rigcast;

namespace {

double gauss(Rng& rng) {
  // Box-Muller; enough for test data.
  const double u1 = std::max(uniform01(rng), 1e-300), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

Matrix random_points(std::size_t n, std::size_t dim, Rng& rng) {
  Matrix m(n, dim);
  for (auto& v : m.data()) v = 10.0 * uniform01(rng);
  return m;
}

TelemetryLog minute_log(std::size_t minutes_long, std::uint64_t seed) {
  auto log = test::wavy_log(minutes_long, seed);
  log.sample_period = Duration{60};
  return log;
}

}  // namespace

TEST_CASE("k-means with one cluster finds the mean") {
  Rng rng(1);
  const auto pts = random_points(40, 3, rng);
  const auto m = fit_kmeans(pts, 1, {});
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 40; ++i) mean += pts(i, j);
    CHECK(m.centroids(0, j) == doctest::Approx(mean / 40.0).epsilon(1e-12));
  }
}

TEST_CASE("k-means with one cluster per point has zero inertia") {
  Rng rng(2);
  const auto pts = random_points(25, 4, rng);
  const auto m = fit_kmeans(pts, 25, {});
  CHECK(m.inertia == 0.0);
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < 25; ++i) used.insert(m.nearest(pts.row(i)));
  CHECK(used.size() == 25);
}

TEST_CASE("k-means recovers three blobs") {
  Rng rng(3);
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  Matrix pts(300, 2);
  std::vector<int> truth(300);
  for (std::size_t i = 0; i < 300; ++i) {
    truth[i] = static_cast<int>(i % 3);
    for (int j = 0; j < 2; ++j) pts(i, j) = centers[truth[i]][j] + 0.1 * gauss(rng);
  }
  const auto m = fit_kmeans(pts, 3, {});
  // Map each centroid to its nearest true center.
  std::vector<int> map(3);
  for (std::size_t c = 0; c < 3; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 3; ++t) {
      const double d = std::hypot(m.centroids(c, 0) - centers[t][0], m.centroids(c, 1) - centers[t][1]);
      if (d < best) {
        best = d;
        map[c] = t;
      }
    }
    CHECK(best < 0.05);
  }
  CHECK(std::set<int>(map.begin(), map.end()).size() == 3);
  for (std::size_t i = 0; i < 300; ++i) CHECK(map[m.nearest(pts.row(i))] == truth[i]);
}

TEST_CASE("k-means inertia never increases") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 50 + seed * 7, dim = 1 + seed % 6, k = 2 + seed % 9;
    const auto pts = random_points(n, dim, rng);
    const auto m = fit_kmeans(pts, k, {seed, 100, 0.0});
    REQUIRE(m.inertia_history.size() >= 2);
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      CHECK(m.inertia_history[i] <= m.inertia_history[i - 1]);
    }
    CHECK(m.inertia == m.inertia_history.back());
  }
}

TEST_CASE("k-means is deterministic per seed") {
  Rng rng(4);
  const auto pts = random_points(500, 5, rng);
  const auto a = fit_kmeans(pts, 12, {99, 50, 1e-9});
  const auto b = fit_kmeans(pts, 12, {99, 50, 1e-9});
  CHECK(a == b);
  const auto c = fit_kmeans(pts, 12, {100, 50, 1e-9});
  CHECK_FALSE(a.centroids == c.centroids);
}

TEST_CASE("k-means inertia is the within-cluster sum of squares") {
  Rng rng(5);
  const auto pts = random_points(120, 3, rng);
  const auto m = fit_kmeans(pts, 6, {7, 100, 1e-12});
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.k(); ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < 3; ++j) d += (pts(i, j) - m.centroids(c, j)) * (pts(i, j) - m.centroids(c, j));
      best = std::min(best, d);
    }
    sse += best;
  }
  CHECK(m.inertia == doctest::Approx(sse).epsilon(1e-9));
}

TEST_CASE("k-means needs enough points") {
  Matrix pts(3, 2, 1.0);
  CHECK_THROWS_AS(fit_kmeans(pts, 4, {}), InsufficientDataError);
  CHECK_THROWS_AS(fit_kmeans(pts, 0, {}), ConfigurationError);
}

TEST_CASE("duplicate points still give k centroids") {
  Matrix pts(30, 1);
  for (std::size_t i = 0; i < 30; ++i) pts(i, 0) = static_cast<double>(i % 2);
  const auto m = fit_kmeans(pts, 4, {});
  CHECK(m.k() == 4);
  CHECK(m.inertia == 0.0);
}

TEST_CASE("nearest centroid ties go to the lower index") {
  KMeansModel m;
  m.centroids = Matrix(6, 1);
  for (std::size_t c = 0; c < 6; ++c) m.centroids(c, 0) = 100.0 + static_cast<double>(c);
  m.centroids(2, 0) = -1.0;
  m.centroids(5, 0) = 1.0;
  const double origin[] = {0.0};
  CHECK(m.nearest(origin) == 2);
}

TEST_CASE("codebook training rows") {
  CodebookOptions o;
  o.k = 1;
  const auto exact = minute_log(24, 1);
  CHECK(codebook_training_matrix(std::span(&exact, 1), Channel::SPPA, o).rows() == 1);
  const auto cb = build_codebook(std::span(&exact, 1), Channel::SPPA, o);
  CHECK(cb.k() == 1);

  const auto day = minute_log(24 * 60, 2);
  const auto rows = codebook_training_matrix(std::span(&day, 1), Channel::SPPA, o);
  CHECK(rows.rows() == (1440 - 24) / 24 + 1);
  CHECK(rows.rows() == 60);
  CHECK(rows.cols() == dwt::coefficient_length(24, o.wavelet));

  o.k = 61;
  CHECK_THROWS_AS(build_codebook(std::span(&day, 1), Channel::SPPA, o), InsufficientDataError);
}

TEST_CASE("flat and oscillating pressure get different codewords") {
  auto log = minute_log(48 * 24, 3);
  auto& p = log.channels[index_of(Channel::SPPA)];
  Rng rng(8);
  std::vector<int> regime(48);
  for (std::size_t w = 0; w < 48; ++w) {
    regime[w] = static_cast<int>(w % 2);
    for (std::size_t i = 0; i < 24; ++i) {
      const double noise = 0.2 * (uniform01(rng) - 0.5);
      p[w * 24 + i] = regime[w] ? 100.0 + 20.0 * std::sin(1.7 * static_cast<double>(i)) + noise : 100.0 + noise;
    }
  }
  CodebookOptions o;
  o.k = 2;
  const auto cb = build_codebook(std::span(&log, 1), Channel::SPPA, o);
  std::size_t agree = 0;
  const std::size_t flat_label = cb.assign(std::span<const double>(p).subspan(0, 24));
  for (std::size_t w = 0; w < 48; ++w) {
    const bool flat = cb.assign(std::span<const double>(p).subspan(w * 24, 24)) == flat_label;
    agree += flat == (regime[w] == 0);
  }
  CHECK(static_cast<double>(agree) / 48.0 > 0.95);
}

TEST_CASE("codebook assignment") {
  const auto day = minute_log(24 * 60, 4);
  CodebookOptions o;
  o.k = 10;
  const auto cb = build_codebook(std::span(&day, 1), Channel::HKLA, o);
  CHECK(cb.assign_coefficients(cb.quantizer.centroids.row(7)) == 7);

  // Brute-force oracle over decompose + every centroid.
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> seg(24);
    for (auto& v : seg) v = 60.0 + 30.0 * uniform01(rng);
    const auto coeffs = dwt::decompose(seg, cb.wavelet);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cb.k(); ++c) {
      double d = 0.0;
      for (std::size_t j = 0; j < coeffs.size(); ++j) {
        const double diff = coeffs[j] - cb.quantizer.centroids(c, j);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    CHECK(cb.assign(seg) == best);
    CHECK(cb.assign_coefficients(coeffs) == best);
  }
  CHECK_THROWS_AS(cb.assign(std::vector<double>(23, 1.0)), ShapeError);
}

TEST_CASE("codebook ties go to the lower codeword") {
  Codebook cb;
  cb.tau_length = minutes(24);
  cb.sample_period = Duration{60};
  const std::size_t dim = dwt::coefficient_length(24, cb.wavelet);
  cb.quantizer.centroids = Matrix(6, dim, 50.0);
  for (std::size_t j = 0; j < dim; ++j) {
    cb.quantizer.centroids(2, j) = -1.0;
    cb.quantizer.centroids(5, j) = 1.0;
  }
  CHECK(cb.assign_coefficients(std::vector<double>(dim, 0.0)) == 2);
}

TEST_CASE("codebook rebuild is bit-identical") {
  std::vector<TelemetryLog> logs = {minute_log(600, 5), minute_log(900, 6)};
  CodebookOptions o;
  o.k = 8;
  o.seed = 17;
  const auto a = build_codebooks(logs, o);
  const auto b = build_codebooks(logs, o);
  CHECK(a == b);
  REQUIRE(a.size() == kChannelCount);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    CHECK(a[c].channel == kAllChannels[c]);
    CHECK(a[c].quantizer.dim() == dwt::coefficient_length(24, o.wavelet));
  }
}
