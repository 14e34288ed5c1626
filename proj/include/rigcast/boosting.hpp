#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigcast/matrix.hpp"

namespace rigcast {

struct BoostingParams {
  int n_estimators = 50;
  double learning_rate = 0.05;
  int max_depth = 10;
  double subsample = 0.9;
  double colsample_bytree = 0.9;
  double positive_class_weight = 5.0;
  std::uint64_t seed = 0;
  // L2 penalty on leaf values and minimum hessian mass per child.
  double reg_lambda = 1.0;
  double min_child_weight = 1.0;

  bool operator==(const BoostingParams&) const = default;
};

struct TreeNode {
  // feature < 0 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;  // rows with x[feature] < threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  bool operator==(const RegressionTree&) const = default;
};

// Binary logistic ensemble: p = sigmoid(base_score + learning_rate * sum(tree(x))).
struct BoostedEnsemble {
  double base_score = 0.0;
  double learning_rate = 0.05;
  std::vector<RegressionTree> trees;

  double margin(std::span<const double> x) const;
  double probability(std::span<const double> x) const;
  bool operator==(const BoostedEnsemble&) const = default;
};

// Column-major view of the non-zero entries of a feature matrix, each column
// sorted by value. Shared read-only between the per-type fits.
class SortedColumns {
 public:
  struct Entry {
    double value;
    std::uint32_t row;
  };

  explicit SortedColumns(const Matrix& x);
  std::span<const Entry> column(std::size_t j) const {
    return {entries_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }
  std::size_t cols() const { return offsets_.size() - 1; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_;
};

double sigmoid(double z);
double logit(double p);

// Gradient boosting on the logistic loss with exact greedy splits. Positive
// rows carry positive_class_weight in both gradient and hessian. Throws
// TrainingError when `labels` has no positive or no negative.
BoostedEnsemble fit_boosted_ensemble(const Matrix& x, const SortedColumns& columns,
                                     std::span<const std::uint8_t> labels, const BoostingParams& params);
BoostedEnsemble fit_boosted_ensemble(const Matrix& x, std::span<const std::uint8_t> labels,
                                     const BoostingParams& params);

}  // namespace rigcast
