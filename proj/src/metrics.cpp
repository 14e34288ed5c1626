#include "rigcast/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "rigcast/error.hpp"

namespace rigcast {

bool SimilarityMatrix::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (at(i, j) != at(j, i)) return false;
    }
  }
  return true;
}

PairCounts pair_counts(const SimilarityMatrix& reference, const SimilarityMatrix& predicted) {
  if (reference.size() != predicted.size()) throw ValidationError("similarity matrices differ in size");
  if (!reference.symmetric() || !predicted.symmetric()) throw ValidationError("similarity matrix is not symmetric");
  PairCounts c;
  const std::size_t n = reference.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool y = reference.at(i, j);
      const bool yhat = predicted.at(i, j);
      if (y && yhat) ++c.tp;
      else if (!y && yhat) ++c.fp;
      else if (y && !yhat) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

double rand_index(const SimilarityMatrix& reference, const SimilarityMatrix& predicted) {
  if (reference.size() < 2) throw ValidationError("rand index needs at least two items");
  const auto c = pair_counts(reference, predicted);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.tp + c.fp + c.fn + c.tn);
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum of positives with ties sharing their average rank; ranks are
  // doubled to stay integral.
  std::uint64_t pos = 0;
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_avg = static_cast<std::uint64_t>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        ++pos;
        twice_rank_sum += twice_avg;
      }
    }
    i = j;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("ROC AUC is undefined with a single class");
  // U = R+ - pos(pos+1)/2, AUC = U / (pos*neg); all doubled.
  const std::uint64_t twice_u = twice_rank_sum - pos * (pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("ROC curve is undefined with a single class");

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, n > 0 ? scores[order[0]] + 1.0 : 1.0});
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? tp : fp) += 1.0;
      ++j;
    }
    curve.push_back({fp / neg, tp / pos, scores[order[i]]});
    i = j;
  }
  return curve;
}

MulticlassAuc multiclass_auc(std::span<const std::vector<double>> scores,
                             std::span<const std::vector<std::uint8_t>> labels) {
  if (scores.size() != labels.size()) throw ValidationError("score and label sets differ in count");
  MulticlassAuc out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    const auto pos = std::count(labels[t].begin(), labels[t].end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels[t].size())) {
      out.per_type.push_back(std::nullopt);
      continue;
    }
    const double auc = roc_auc(scores[t], labels[t]);
    out.per_type.push_back(auc);
    sum += auc;
    ++defined;
  }
  if (defined == 0) throw UndefinedMetricError("no accident type has both classes present");
  out.macro = sum / static_cast<double>(defined);
  return out;
}

}  // namespace rigcast
