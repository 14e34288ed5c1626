#include "rigcast/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rigcast/error.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double BoostedEnsemble::margin(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return base_score + learning_rate * sum;
}

double BoostedEnsemble::probability(std::span<const double> x) const { return sigmoid(margin(x)); }

SortedColumns::SortedColumns(const Matrix& x) {
  const std::size_t d = x.cols();
  std::vector<std::size_t> counts(d, 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) counts[j] += row[j] != 0.0;
  }
  offsets_.assign(d + 1, 0);
  for (std::size_t j = 0; j < d; ++j) offsets_[j + 1] = offsets_[j] + counts[j];
  entries_.resize(offsets_[d]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      if (row[j] != 0.0) entries_[fill[j]++] = {row[j], static_cast<std::uint32_t>(r)};
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    std::stable_sort(entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[j]),
                     entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[j + 1]),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });
  }
}

namespace {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

// Running left-side sums of one node while scanning a sorted column.
struct ScanState {
  double gl = 0.0;
  double hl = 0.0;
  std::size_t nl = 0;
  double prev = 0.0;
  bool has_prev = false;
  bool zero_done = false;
  NodeStats nonzero;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const SortedColumns& columns, std::span<const double> grad,
              std::span<const double> hess, const BoostingParams& params)
      : x_(x), columns_(columns), grad_(grad), hess_(hess), params_(params) {}

  RegressionTree build(std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features) {
    RegressionTree tree;
    node_of_.assign(x_.rows(), -1);
    NodeStats root;
    for (auto r : rows) {
      node_of_[r] = 0;
      root.g += grad_[r];
      root.h += hess_[r];
      ++root.count;
    }
    tree.nodes.push_back({});
    std::vector<std::int32_t> level = {0};
    std::vector<NodeStats> stats = {root};

    for (int depth = 0; !level.empty(); ++depth) {
      std::vector<SplitCandidate> best(level.size());
      if (depth < params_.max_depth) find_splits(level, stats, features, best);

      std::vector<std::int32_t> next_level;
      std::vector<NodeStats> next_stats;
      for (std::size_t i = 0; i < level.size(); ++i) {
        auto& node = tree.nodes[static_cast<std::size_t>(level[i])];
        if (best[i].feature < 0) {
          node.value = -stats[i].g / (stats[i].h + params_.reg_lambda);
          continue;
        }
        node.feature = best[i].feature;
        node.threshold = best[i].threshold;
        node.left = static_cast<std::int32_t>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        next_level.push_back(node.left);
        next_level.push_back(node.right);
        next_stats.push_back({});
        next_stats.push_back({});
      }
      if (next_level.empty()) break;

      // Route rows into the children created above.
      std::vector<std::int32_t> child_slot(tree.nodes.size(), -1);
      for (std::size_t i = 0; i < next_level.size(); ++i) child_slot[static_cast<std::size_t>(next_level[i])] = static_cast<std::int32_t>(i);
      for (std::size_t r = 0; r < node_of_.size(); ++r) {
        const auto n = node_of_[r];
        if (n < 0) continue;
        const auto& node = tree.nodes[static_cast<std::size_t>(n)];
        if (node.feature < 0) {
          node_of_[r] = -1;
          continue;
        }
        const auto child = x_(r, static_cast<std::size_t>(node.feature)) < node.threshold ? node.left : node.right;
        node_of_[r] = child;
        auto& s = next_stats[static_cast<std::size_t>(child_slot[static_cast<std::size_t>(child)])];
        s.g += grad_[r];
        s.h += hess_[r];
        ++s.count;
      }
      level = std::move(next_level);
      stats = std::move(next_stats);
    }
    return tree;
  }

 private:
  double score(double g, double h) const { return g * g / (h + params_.reg_lambda); }

  void consider(const NodeStats& total, const ScanState& st, double next_value, std::int32_t feature,
                SplitCandidate& best) const {
    if (!st.has_prev || !(next_value > st.prev)) return;
    const double hr = total.h - st.hl;
    if (st.hl < params_.min_child_weight || hr < params_.min_child_weight) return;
    const double gain = score(st.gl, st.hl) + score(total.g - st.gl, hr) - score(total.g, total.h);
    if (gain > best.gain) {
      best.gain = gain;
      best.feature = feature;
      best.threshold = st.prev + 0.5 * (next_value - st.prev);
      if (!(best.threshold > st.prev)) best.threshold = next_value;
    }
  }

  void find_splits(std::span<const std::int32_t> level, std::span<const NodeStats> stats,
                   std::span<const std::uint32_t> features, std::span<SplitCandidate> best) {
    // Map tree node id -> slot in this level.
    std::int32_t max_id = 0;
    for (auto id : level) max_id = std::max(max_id, id);
    std::vector<std::int32_t> slot(static_cast<std::size_t>(max_id) + 1, -1);
    for (std::size_t i = 0; i < level.size(); ++i) slot[static_cast<std::size_t>(level[i])] = static_cast<std::int32_t>(i);
    const auto slot_of = [&](std::uint32_t row) -> std::int32_t {
      const auto n = node_of_[row];
      if (n < 0 || n > max_id) return -1;
      return slot[static_cast<std::size_t>(n)];
    };

    std::vector<ScanState> state(level.size());
    for (auto f : features) {
      const auto col = columns_.column(f);
      for (auto& s : state) s = {};
      for (const auto& e : col) {
        const auto i = slot_of(e.row);
        if (i < 0) continue;
        auto& nz = state[static_cast<std::size_t>(i)].nonzero;
        nz.g += grad_[e.row];
        nz.h += hess_[e.row];
        ++nz.count;
      }
      const auto fid = static_cast<std::int32_t>(f);
      const auto add_zero_block = [&](std::size_t i) {
        auto& st = state[i];
        st.zero_done = true;
        const auto& total = stats[i];
        if (total.count == st.nonzero.count) return;
        consider(total, st, 0.0, fid, best[i]);
        st.gl += total.g - st.nonzero.g;
        st.hl += total.h - st.nonzero.h;
        st.nl += total.count - st.nonzero.count;
        st.prev = 0.0;
        st.has_prev = true;
      };
      for (const auto& e : col) {
        const auto si = slot_of(e.row);
        if (si < 0) continue;
        const auto i = static_cast<std::size_t>(si);
        auto& st = state[i];
        if (!st.zero_done && e.value > 0.0) add_zero_block(i);
        consider(stats[i], st, e.value, fid, best[i]);
        st.gl += grad_[e.row];
        st.hl += hess_[e.row];
        ++st.nl;
        st.prev = e.value;
        st.has_prev = true;
      }
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (!state[i].zero_done) add_zero_block(i);
      }
    }
  }

  const Matrix& x_;
  const SortedColumns& columns_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const BoostingParams& params_;
  std::vector<std::int32_t> node_of_;
};

// k distinct indices out of [0, n), ascending.
std::vector<std::uint32_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(all[i], all[std::min(j, n - 1)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::size_t fraction_count(double fraction, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, n > 0 ? 1 : 0, n);
}

}  // namespace

BoostedEnsemble fit_boosted_ensemble(const Matrix& x, const SortedColumns& columns,
                                     std::span<const std::uint8_t> labels, const BoostingParams& params) {
  const std::size_t n = x.rows();
  if (labels.size() != n) throw ShapeError("label count does not match feature rows");
  if (columns.cols() != x.cols()) throw ShapeError("column index does not match feature matrix");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw TrainingError("no positive examples");
  if (positives == n) throw TrainingError("no negative examples");

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = labels[i] ? params.positive_class_weight : 1.0;
  const double wpos = params.positive_class_weight * static_cast<double>(positives);
  const double wneg = static_cast<double>(n - positives);

  BoostedEnsemble ens;
  ens.base_score = logit(wpos / (wpos + wneg));
  ens.learning_rate = params.learning_rate;

  std::vector<double> margin(n, ens.base_score);
  std::vector<double> grad(n), hess(n);
  Rng rng(params.seed);
  TreeBuilder builder(x, columns, grad, hess, params);
  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = weight[i] * (p - static_cast<double>(labels[i]));
      hess[i] = std::max(weight[i] * p * (1.0 - p), 1e-16);
    }
    const auto rows = sample_indices(n, fraction_count(params.subsample, n), rng);
    const auto feats = sample_indices(x.cols(), fraction_count(params.colsample_bytree, x.cols()), rng);
    auto tree = builder.build(rows, feats);
    for (std::size_t i = 0; i < n; ++i) margin[i] += params.learning_rate * tree.predict(x.row(i));
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

BoostedEnsemble fit_boosted_ensemble(const Matrix& x, std::span<const std::uint8_t> labels,
                                     const BoostingParams& params) {
  const SortedColumns columns(x);
  return fit_boosted_ensemble(x, columns, labels, params);
}

}  // namespace rigcast
