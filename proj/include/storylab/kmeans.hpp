#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace storylab {

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;          // one per input point
  double inertia = 0.0;                  // sum of squared distances to assigned centroid
  std::vector<double> inertia_history;   // one entry per assignment step, non-increasing
  std::uint64_t seed = 0;
};

namespace kmeans_detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline void check_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw std::runtime_error("k-means: no points");
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::runtime_error("k-means: inconsistent point dimensions");
    for (double x : p)
      if (!std::isfinite(x)) throw std::runtime_error("k-means: non-finite input");
  }
}

inline std::size_t count_distinct(const std::vector<std::vector<double>>& points) {
  std::set<std::vector<double>> s(points.begin(), points.end());
  return s.size();
}

// Nearest-centroid assignment (ties to the lowest index) followed by
// empty-cluster reseeding: an empty cluster takes over the point farthest
// from its assigned centroid. Returns the resulting inertia, exact for the
// assignment/centroid state it leaves behind.
inline double assign_and_reseed(const std::vector<std::vector<double>>& points,
                                std::vector<std::vector<double>>& centroids,
                                std::vector<int>& assignments) {
  const std::size_t n = points.size();
  const int k = static_cast<int>(centroids.size());
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double d = sq_dist(points[i], centroids[static_cast<std::size_t>(c)]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    assignments[i] = arg;
    inertia += best;
  }

  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t worst = n;
    double worst_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[static_cast<std::size_t>(assignments[i])] <= 1) continue;
      const double d = sq_dist(points[i], centroids[static_cast<std::size_t>(assignments[i])]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    if (worst == n) throw std::runtime_error("k-means: cannot reseed empty cluster");
    inertia -= worst_d;
    --sizes[static_cast<std::size_t>(assignments[worst])];
    assignments[worst] = c;
    sizes[static_cast<std::size_t>(c)] = 1;
    centroids[static_cast<std::size_t>(c)] = points[worst];
  }
  return inertia;
}

}  // namespace kmeans_detail

// Lloyd iterations from explicit initial centroids. Stops when the largest
// centroid shift drops below tol or after max_iters; the returned model is
// self-consistent (assignments match the final centroids, no empty cluster)
// and its per-step inertia history is non-increasing.
inline ClusterModel kmeans_fit_from(const std::vector<std::vector<double>>& points,
                                    std::vector<std::vector<double>> centroids, int max_iters,
                                    double tol) {
  using namespace kmeans_detail;
  check_points(points);
  const int k = static_cast<int>(centroids.size());
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  if (k < 1) throw std::runtime_error("k-means: k must be >= 1");
  if (static_cast<std::size_t>(k) > n) throw std::runtime_error("k-means: k exceeds the number of points");
  if (max_iters < 1) throw std::runtime_error("k-means: max_iters must be >= 1");
  if (tol < 0.0) throw std::runtime_error("k-means: tol must be >= 0");

  ClusterModel model;
  model.k = k;
  model.assignments.assign(n, 0);

  auto record = [&](double inertia) {
    if (!model.inertia_history.empty() && inertia > model.inertia_history.back() + 1e-9)
      throw std::logic_error("k-means: inertia increased across iterations");
    model.inertia_history.push_back(inertia);
    model.inertia = inertia;
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    record(assign_and_reseed(points, centroids, model.assignments));

    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (model.assignments[i] != c) continue;
        ++count;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
      }
      for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(count);
      max_shift =
          std::max(max_shift, std::sqrt(sq_dist(mean, centroids[static_cast<std::size_t>(c)])));
      centroids[static_cast<std::size_t>(c)] = std::move(mean);
    }
    if (max_shift < tol) break;
  }

  // Assignments must match the final centroid update.
  record(assign_and_reseed(points, centroids, model.assignments));
  model.centroids = std::move(centroids);
  return model;
}

// Seeded k-means++ initialization: first centroid uniform, each next drawn
// with probability proportional to the squared distance to the nearest
// already-chosen centroid.
inline std::vector<std::vector<double>> kmeans_plusplus_init(
    const std::vector<std::vector<double>>& points, int k, std::mt19937_64& rng) {
  using namespace kmeans_detail;
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    } else {
      const double r = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          chosen = i;
          break;
        }
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

inline ClusterModel kmeans_fit(const std::vector<std::vector<double>>& points, int k,
                               std::uint64_t seed, int max_iters = 300, double tol = 1e-6) {
  using namespace kmeans_detail;
  check_points(points);
  if (k < 1) throw std::runtime_error("k-means: k must be >= 1");
  if (static_cast<std::size_t>(k) > count_distinct(points))
    throw std::runtime_error("k-means: k exceeds the number of distinct points");
  std::mt19937_64 rng(seed);
  auto model = kmeans_fit_from(points, kmeans_plusplus_init(points, k, rng), max_iters, tol);
  model.seed = seed;
  return model;
}

}  // namespace storylab
