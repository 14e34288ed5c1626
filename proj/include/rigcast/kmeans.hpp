#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigcast/matrix.hpp"

namespace rigcast {

struct KMeansOptions {
  std::uint64_t seed = 0;
  int max_iter = 100;
  // Stop once no centroid moves farther than this (Euclidean).
  double tol = 1e-6;
};

struct KMeansModel {
  Matrix centroids;  // K x dim
  double inertia = 0.0;
  std::uint64_t seed = 0;
  // Within-cluster sum of squares after every assignment pass.
  std::vector<double> inertia_history;

  std::size_t k() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }

  // Nearest centroid; ties go to the lowest index.
  std::size_t nearest(std::span<const double> point) const;
  bool operator==(const KMeansModel&) const = default;
};

// Lloyd iterations from k-means++ seeding. Empty clusters are re-seeded with
// the point farthest from its current centroid. Throws InsufficientDataError
// when there are fewer points than clusters.
KMeansModel fit_kmeans(const Matrix& points, std::size_t k, const KMeansOptions& options = {});

}  // namespace rigcast
