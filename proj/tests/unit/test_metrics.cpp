#include <doctest.h>

#include <cmath>

#include "rigcast/error.hpp"
#include "rigcast/metrics.hpp"
#include "rigcast/rng.hpp"

using namespace rigcast;

namespace {

SimilarityMatrix labels_matrix(std::vector<int> labels) {
  return SimilarityMatrix::from_labels<int>(std::span<const int>(labels));
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int classes) {
  std::vector<int> out(n);
  for (auto& v : out) v = static_cast<int>(uniform01(rng) * classes);
  return out;
}

double brute_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("rand index worked example") {
  CHECK(rand_index(labels_matrix({0, 0, 1}), labels_matrix({0, 1, 1})) == doctest::Approx(1.0 / 3.0));
  const auto a = labels_matrix({0, 1, 0, 2, 2});
  CHECK(rand_index(a, a) == 1.0);
}

TEST_CASE("rand index of a complemented matrix is zero") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = labels_matrix(random_labels(rng, 12, 3));
    SimilarityMatrix b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) b.set(i, j, i == j || !a.at(i, j));
    }
    CHECK(rand_index(a, b) == 0.0);
  }
}

TEST_CASE("rand index against a pair-counting oracle") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 29);
    const auto la = random_labels(rng, n, 1 + trial % 5), lb = random_labels(rng, n, 1 + trial % 4);
    double agree = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        total += 1.0;
        agree += (la[i] == la[j]) == (lb[i] == lb[j]);
      }
    }
    const auto a = labels_matrix(la), b = labels_matrix(lb);
    const double ri = rand_index(a, b);
    CHECK(ri == doctest::Approx(agree / total).epsilon(1e-12));
    CHECK(ri == rand_index(b, a));
    CHECK((ri >= 0.0 && ri <= 1.0));
    const auto pc = pair_counts(a, b);
    CHECK(pc.tp + pc.fp + pc.fn + pc.tn == n * (n - 1) / 2);
  }
}

TEST_CASE("rand index input validation") {
  SimilarityMatrix asym(3);
  asym.set(0, 1, true);
  CHECK_FALSE(asym.symmetric());
  CHECK_THROWS_AS(rand_index(asym, labels_matrix({0, 1, 2})), ValidationError);
  CHECK_THROWS_AS(rand_index(labels_matrix({0, 1}), labels_matrix({0, 1, 2})), ValidationError);
  CHECK_THROWS_AS(rand_index(labels_matrix({0}), labels_matrix({0})), ValidationError);
}

TEST_CASE("auc against the pairwise oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 29);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so ties are common.
      s[i] = std::floor(uniform01(rng) * 6.0);
      y[i] = uniform01(rng) < 0.4;
    }
    y[0] = 1;
    y[1] = 0;
    const double auc = roc_auc(s, y);
    CHECK(auc == doctest::Approx(brute_auc(s, y)).epsilon(1e-12));

    // Negating scores mirrors the AUC.
    std::vector<double> neg(n), mono(n);
    for (std::size_t i = 0; i < n; ++i) {
      neg[i] = -s[i];
      mono[i] = std::exp(0.3 * s[i]) + 2.0;
    }
    CHECK(roc_auc(neg, y) == doctest::Approx(1.0 - auc).epsilon(1e-12));
    CHECK(roc_auc(mono, y) == doctest::Approx(auc).epsilon(1e-12));
  }
}

TEST_CASE("auc edge cases") {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  CHECK(roc_auc(s, std::vector<std::uint8_t>{0, 0, 1, 1}) == 0.75);
  CHECK(roc_auc(std::vector<double>(4, 0.3), std::vector<std::uint8_t>{0, 1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(roc_auc(s, std::vector<std::uint8_t>(4, 1)), UndefinedMetricError);
  CHECK_THROWS_AS(roc_auc(s, std::vector<std::uint8_t>(4, 0)), UndefinedMetricError);
}

TEST_CASE("roc curve runs from the origin to the corner") {
  Rng rng(4);
  std::vector<double> s(50);
  std::vector<std::uint8_t> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = std::floor(uniform01(rng) * 10.0);
    y[i] = i % 3 == 0;
  }
  const auto curve = roc_curve(s, y);
  REQUIRE(curve.size() >= 2);
  CHECK(curve.front().fpr == 0.0);
  CHECK(curve.front().tpr == 0.0);
  CHECK(curve.back().fpr == 1.0);
  CHECK(curve.back().tpr == 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].fpr >= curve[i - 1].fpr);
    CHECK(curve[i].tpr >= curve[i - 1].tpr);
    CHECK(curve[i].threshold < curve[i - 1].threshold);
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  // Trapezoids under the curve give the same number as the rank statistic.
  CHECK(area == doctest::Approx(roc_auc(s, y)).epsilon(1e-12));
}

TEST_CASE("macro auc skips missing classes") {
  std::vector<std::vector<double>> scores(6, std::vector<double>(6, 0.5));
  std::vector<std::vector<std::uint8_t>> labels(6, std::vector<std::uint8_t>(6, 0));
  // One positive against five negatives: it beats four of them, then three.
  scores[0] = {0.9, 0.1, 0.2, 0.3, 0.95, 0.4};
  labels[0] = {1, 0, 0, 0, 0, 0};
  scores[1] = {0.5, 0.1, 0.6, 0.7, 0.2, 0.3};
  labels[1] = {1, 0, 0, 0, 0, 0};
  const auto m = multiclass_auc(scores, labels);
  REQUIRE(m.per_type.size() == 6);
  CHECK(*m.per_type[0] == doctest::Approx(0.8));
  CHECK(*m.per_type[1] == doctest::Approx(0.6));
  for (std::size_t t = 2; t < 6; ++t) CHECK_FALSE(m.per_type[t].has_value());
  CHECK(m.macro == doctest::Approx(0.7));

  for (auto& l : labels) l.assign(6, 0);
  CHECK_THROWS_AS(multiclass_auc(scores, labels), UndefinedMetricError);
}

TEST_CASE("random scores give chance-level macro auc") {
  Rng rng(5);
  double sum = 0.0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::vector<double>> scores(6, std::vector<double>(400));
    std::vector<std::vector<std::uint8_t>> labels(6, std::vector<std::uint8_t>(400));
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t i = 0; i < 400; ++i) {
        scores[t][i] = uniform01(rng);
        labels[t][i] = uniform01(rng) < 0.2;
      }
    }
    sum += multiclass_auc(scores, labels).macro;
  }
  CHECK(std::abs(sum / trials - 0.5) < 0.05);
}
