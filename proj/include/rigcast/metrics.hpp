#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rigcast {

// Symmetric binary pairwise-similarity matrix over n items.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::size_t n) : n_(n), entries_(n * n, 0) {}

  // entry(i, j) = 1 iff labels[i] == labels[j].
  template <typename Label>
  static SimilarityMatrix from_labels(std::span<const Label> labels) {
    SimilarityMatrix m(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = 0; j < labels.size(); ++j) m.set(i, j, labels[i] == labels[j]);
    }
    return m;
  }

  std::size_t size() const { return n_; }
  bool at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { entries_[i * n_ + j] = v ? 1 : 0; }
  void set_pair(std::size_t i, std::size_t j, bool v) {
    set(i, j, v);
    set(j, i, v);
  }
  bool symmetric() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> entries_;
};

struct PairCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

// Counts over unordered pairs i < j; the diagonal is excluded.
PairCounts pair_counts(const SimilarityMatrix& reference, const SimilarityMatrix& predicted);

// (TP + TN) / (TP + FP + FN + TN). Throws ValidationError on asymmetric or
// mismatched inputs, or fewer than two items.
double rand_index(const SimilarityMatrix& reference, const SimilarityMatrix& predicted);

// Mann-Whitney estimate P(s+ > s-) + P(s+ == s-)/2 via average ranks.
// Throws UndefinedMetricError when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;

  bool operator==(const RocPoint&) const = default;
};

// Curve from (0,0) to (1,1); one point per distinct score, thresholds descending.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct MulticlassAuc {
  double macro = 0.0;
  std::vector<std::optional<double>> per_type;  // nullopt where a class is missing
};

// Unweighted mean of the per-type AUCs that are defined. Throws
// UndefinedMetricError when none is.
MulticlassAuc multiclass_auc(std::span<const std::vector<double>> scores,
                             std::span<const std::vector<std::uint8_t>> labels);

}  // namespace rigcast
