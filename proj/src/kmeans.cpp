#include "rigcast/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rigcast/error.hpp"
#include "rigcast/parallel.hpp"
#include "rigcast/rng.hpp"

namespace rigcast {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) cols_ = values.size();
  if (values.size() != cols_) throw ShapeError("row has " + std::to_string(values.size()) +
                                               " values, matrix has " + std::to_string(cols_) + " columns");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

std::size_t KMeansModel::nearest(std::span<const double> point) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

constexpr std::size_t kChunk = 128;

// Hamerly's bounds: `upper` bounds the distance to the assigned centroid,
// `lower` bounds the distance to every other centroid. Points whose bounds
// prove the assignment unchanged skip the full scan, so the result equals a
// plain Lloyd assignment step.
struct Assignment {
  std::vector<std::size_t> label;
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> distance;  // squared distance to the assigned centroid
  double inertia = 0.0;

  explicit Assignment(std::size_t n) : label(n, 0), upper(n, 0.0), lower(n, 0.0), distance(n, 0.0) {}
};

constexpr double kBoundSlack = 1.0 - 1e-9;

void full_scan(std::span<const double> p, const Matrix& centroids, std::size_t& label, double& d1, double& d2) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(p, centroids.row(c));
    if (d < best_d) {
      second = best_d;
      best_d = d;
      best = c;
    } else if (d < second) {
      second = d;
    }
  }
  label = best;
  d1 = best_d;
  d2 = second;
}

double sum_chunks(std::span<const double> partial) {
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

void assign_initial(const Matrix& points, const Matrix& centroids, Assignment& a) {
  const std::size_t n = points.rows();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ch) {
    const std::size_t end = std::min(n, (ch + 1) * kChunk);
    double sum = 0.0;
    for (std::size_t i = ch * kChunk; i < end; ++i) {
      double d1 = 0.0, d2 = 0.0;
      full_scan(points.row(i), centroids, a.label[i], d1, d2);
      a.distance[i] = d1;
      a.upper[i] = std::sqrt(d1);
      a.lower[i] = std::sqrt(d2);
      sum += d1;
    }
    partial[ch] = sum;
  });
  a.inertia = sum_chunks(partial);
}

// Reassigns after the centroids moved by `shift`.
void assign_bounded(const Matrix& points, const Matrix& centroids, std::span<const double> shift,
                    Assignment& a) {
  const std::size_t n = points.rows();
  const std::size_t k = centroids.rows();

  // Half the distance from each centroid to its nearest neighbour.
  std::vector<double> half_gap(k, std::numeric_limits<double>::infinity());
  parallel_for(k, [&](std::size_t c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < k; ++o) {
      if (o != c) best = std::min(best, squared_distance(centroids.row(c), centroids.row(o)));
    }
    half_gap[c] = 0.5 * std::sqrt(best);
  });
  // Largest shift, and the largest shift excluding the argmax centroid.
  std::size_t top = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (shift[c] > shift[top]) top = c;
  }
  double runner_up = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (c != top) runner_up = std::max(runner_up, shift[c]);
  }

  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ch) {
    const std::size_t end = std::min(n, (ch + 1) * kChunk);
    double sum = 0.0;
    for (std::size_t i = ch * kChunk; i < end; ++i) {
      const auto p = points.row(i);
      const std::size_t c = a.label[i];
      a.upper[i] += shift[c];
      a.lower[i] -= c == top ? runner_up : shift[top];
      const double bound = std::max(half_gap[c], a.lower[i]) * kBoundSlack;
      if (a.upper[i] > bound) {
        const double d = squared_distance(p, centroids.row(c));
        a.upper[i] = std::sqrt(d);
        if (a.upper[i] > bound) {
          double d1 = 0.0, d2 = 0.0;
          full_scan(p, centroids, a.label[i], d1, d2);
          a.upper[i] = std::sqrt(d1);
          a.lower[i] = std::sqrt(d2);
        }
      }
      a.distance[i] = squared_distance(p, centroids.row(a.label[i]));
      sum += a.distance[i];
    }
    partial[ch] = sum;
  });
  a.inertia = sum_chunks(partial);
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);

  std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : min_d) total += d;
      if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          acc += min_d[i];
          if (acc > target && min_d[i] > 0.0) {
            pick = i;
            break;
          }
        }
        if (pick == n) {
          // Rounding left the target past the end; take the last positive weight.
          for (std::size_t i = n; i-- > 0;) {
            if (min_d[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every point coincides with a chosen centroid.
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
        if (pick == n) pick = 0;
      }
    }
    chosen[pick] = 1;
    const auto src = points.row(pick);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    const auto cen = centroids.row(c);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t ch) {
      const std::size_t end = std::min(n, (ch + 1) * kChunk);
      for (std::size_t i = ch * kChunk; i < end; ++i) {
        min_d[i] = std::min(min_d[i], squared_distance(points.row(i), cen));
      }
    });
  }
  return centroids;
}

}  // namespace

KMeansModel fit_kmeans(const Matrix& points, std::size_t k, const KMeansOptions& options) {
  if (k == 0) throw ConfigurationError("k-means needs at least one cluster");
  if (points.rows() < k) {
    throw InsufficientDataError("k-means with K=" + std::to_string(k) + " needs at least " +
                                std::to_string(k) + " points, got " + std::to_string(points.rows()));
  }
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();

  Rng rng(options.seed);
  KMeansModel model;
  model.seed = options.seed;
  model.centroids = seed_plus_plus(points, k, rng);

  Assignment a(n);
  assign_initial(points, model.centroids, a);
  model.inertia_history.push_back(a.inertia);

  Matrix sums(k, dim);
  std::vector<std::size_t> counts(k);
  std::vector<double> shift(k);
  for (int iter = 0; iter < std::max(1, options.max_iter); ++iter) {
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(a.label[i]);
      const auto p = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[a.label[i]];
    }

    double max_shift = 0.0;
    std::vector<char> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      auto cen = model.centroids.row(c);
      if (counts[c] == 0) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!taken[i] && a.distance[i] > far_d) {
            far_d = a.distance[i];
            far = i;
          }
        }
        taken[far] = 1;
        const auto p = points.row(far);
        shift[c] = std::sqrt(squared_distance(cen, p));
        std::copy(p.begin(), p.end(), cen.begin());
      } else {
        const double inv = 1.0 / static_cast<double>(counts[c]);
        double moved = 0.0;
        const auto s = sums.row(c);
        for (std::size_t j = 0; j < dim; ++j) {
          const double v = s[j] * inv;
          moved += (v - cen[j]) * (v - cen[j]);
          cen[j] = v;
        }
        shift[c] = std::sqrt(moved);
      }
      max_shift = std::max(max_shift, shift[c]);
    }
    assign_bounded(points, model.centroids, shift, a);
    model.inertia_history.push_back(a.inertia);
    if (max_shift < options.tol) break;
  }
  model.inertia = a.inertia;
  return model;
}

}  // namespace rigcast
