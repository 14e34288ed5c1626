#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "rigcast/boosting.hpp"
#include "rigcast/error.hpp"
#include "rigcast/model.hpp"
#include "rigcast/rng.hpp"
#include "test_helpers.hpp"

using namespace rigcast;

namespace {

SegmentSpan span_ending(const std::string& well, Timestamp end) { return {well, end - minutes(72), end}; }

// Feature 0 separates the classes; the rest is noise.
void separable(std::size_t n, Matrix& x, std::vector<std::uint8_t>& y, std::uint64_t seed) {
  Rng rng(seed);
  x = Matrix(n, 5);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 3 == 0;
    x(i, 0) = y[i] ? 100.0 : 0.0;
    for (std::size_t j = 1; j < 5; ++j) x(i, j) = std::floor(10.0 * uniform01(rng));
  }
}

std::vector<LabelVector> all_types(const std::vector<std::uint8_t>& y) {
  std::vector<LabelVector> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i].fill(y[i] != 0);
  return out;
}

}  // namespace

TEST_CASE("six-hour labeling rule") {
  const auto t = test::t0() + hours(30);
  const std::vector<AccidentRecord> acc = {{"w1", AccidentType::Stuck, t},
                                           {"w2", AccidentType::MudLoss, t},
                                           {"w2", AccidentType::Packing, t + hours(1)}};
  const std::vector<SegmentSpan> spans = {
      span_ending("w1", t - hours(3)),  // Stuck
      span_ending("w1", t - hours(7)),  // too early
      span_ending("w2", t - hours(2)),  // MudLoss and Packing
      span_ending("w1", t),             // ends exactly at the start
      span_ending("w1", t - hours(6)),  // exactly six hours ahead
      span_ending("w1", t + minutes(5)),
      span_ending("w3", t - hours(1)),
  };
  const auto labels = label_segments(spans, acc);
  auto flags = [&](std::size_t i) {
    std::set<AccidentType> s;
    for (std::size_t k = 0; k < kAccidentTypeCount; ++k) {
      if (labels[i][k]) s.insert(kAllAccidentTypes[k]);
    }
    return s;
  };
  CHECK(flags(0) == std::set{AccidentType::Stuck});
  CHECK(flags(1).empty());
  CHECK(flags(2) == std::set{AccidentType::MudLoss, AccidentType::Packing});
  CHECK(flags(3) == std::set{AccidentType::Stuck});
  CHECK(flags(4) == std::set{AccidentType::Stuck});
  CHECK(flags(5).empty());
  CHECK(flags(6).empty());
}

TEST_CASE("boosting separates a separable toy set") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(300, x, y, 1);
  BoostingParams p;
  p.n_estimators = 100;
  const auto e = fit_boosted_ensemble(x, y, p);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double prob = e.probability(x.row(i));
    if (y[i]) CHECK(prob > 0.9);
    else CHECK(prob < 0.1);
  }
}

TEST_CASE("no trees predicts the weighted prior") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(90, x, y, 2);
  BoostingParams p;
  p.n_estimators = 0;
  const auto e = fit_boosted_ensemble(x, y, p);
  CHECK(e.trees.empty());
  const double pos = 30.0 * p.positive_class_weight, neg = 60.0;
  const double prior = pos / (pos + neg);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(e.probability(x.row(i)) == doctest::Approx(prior).epsilon(1e-12));
  CHECK(sigmoid(logit(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("duplicating the data keeps the tree structure") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(120, x, y, 3);
  Matrix x2 = x;
  for (std::size_t i = 0; i < x.rows(); ++i) x2.append_row(x.row(i));
  auto y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  BoostingParams p;
  p.subsample = 1.0;
  p.colsample_bytree = 1.0;
  p.n_estimators = 10;
  const auto a = fit_boosted_ensemble(x, y, p);
  const auto b = fit_boosted_ensemble(x2, y2, p);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      const auto& na = a.trees[t].nodes[n];
      const auto& nb = b.trees[t].nodes[n];
      CHECK(std::tie(na.feature, na.threshold, na.left, na.right) == std::tie(nb.feature, nb.threshold, nb.left, nb.right));
    }
  }
}

TEST_CASE("boosting rejects single-class labels") {
  Matrix x(10, 2, 1.0);
  CHECK_THROWS_AS(fit_boosted_ensemble(x, std::vector<std::uint8_t>(10, 0), {}), TrainingError);
  CHECK_THROWS_AS(fit_boosted_ensemble(x, std::vector<std::uint8_t>(10, 1), {}), TrainingError);
  CHECK_THROWS_AS(fit_boosted_ensemble(x, std::vector<std::uint8_t>(9, 1), {}), ShapeError);
}

TEST_CASE("training names a type without positives") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(60, x, y, 4);
  auto labels = all_types(y);
  for (auto& l : labels) l[index_of(AccidentType::FluidShow)] = false;
  try {
    train(x, labels, BoostingParams{});
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find(accident_name(AccidentType::FluidShow)) != std::string::npos);
  }
}

TEST_CASE("prediction is pure and checks the dimension") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(60, x, y, 5);
  const auto m = train(x, all_types(y), BoostingParams{});
  CHECK(m.feature_dim == 5);
  const auto a = predict_proba(m, x.row(3));
  // Scoring other rows in between does not change anything.
  for (std::size_t i = 0; i < x.rows(); ++i) predict_proba(m, x.row(i));
  CHECK(predict_proba(m, x.row(3)) == a);
  for (double p : a) CHECK((p >= 0.0 && p <= 1.0));
  CHECK_THROWS_AS(predict_proba(m, std::vector<double>(4, 0.0)), ShapeError);
}

TEST_CASE("per-type ensembles are independent") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(90, x, y, 6);
  BoostingParams p;
  p.n_estimators = 8;
  auto seeds = type_seeds(p);
  const auto a = train(x, all_types(y), p, seeds);
  seeds[2] ^= 0x5555;
  const auto b = train(x, all_types(y), p, seeds);
  for (std::size_t t = 0; t < kAccidentTypeCount; ++t) {
    if (t != 2) CHECK(a.ensembles[t] == b.ensembles[t]);
  }
  CHECK_FALSE(a.ensembles[2] == b.ensembles[2]);
}

TEST_CASE("a larger learning rate moves round-one predictions further") {
  Matrix x;
  std::vector<std::uint8_t> y;
  separable(90, x, y, 7);
  double last_pos = -1.0, last_neg = 2.0;
  for (double lr : {0.01, 0.05, 0.1, 0.3, 1.0}) {
    BoostingParams p;
    p.n_estimators = 1;
    p.learning_rate = lr;
    p.subsample = 1.0;
    p.colsample_bytree = 1.0;
    const auto e = fit_boosted_ensemble(x, y, p);
    const double pos = e.probability(x.row(0)), neg = e.probability(x.row(1));
    CHECK(pos > last_pos);
    CHECK(neg < last_neg);
    last_pos = pos;
    last_neg = neg;
  }
}

TEST_CASE("stream evaluation instants") {
  auto log = test::wavy_log(720 * 5, 8);  // 5 h at 5 s
  const auto starts = stream_window_starts(log, minutes(72), minutes(10));
  // First instant at 80 min, last at 300 min.
  CHECK(starts.size() == 23);
  CHECK(log.time_at(starts.front() + to_samples(minutes(72), log.sample_period)) == log.start_time + minutes(80));
  CHECK(stream_window_starts(log, minutes(72), hours(6)).empty());
  CHECK(stream_window_starts(slice(log, log.start_time, log.start_time + hours(1)), minutes(72), minutes(10)).empty());
}
