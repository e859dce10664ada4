#pragma once

// k-means over masked TF-IDF vectors and the constrained group generation
// loop: every similarity cluster must hold at least two security labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/random.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

/// Dense centroids living in the similarity subspace of `feature_mask`.
class CentroidSet {
 public:
  CentroidSet() = default;
  CentroidSet(std::vector<std::vector<double>> centroids, SimilarityFeatureMask mask)
      : centroids_(std::move(centroids)), mask_(std::move(mask)) {
    squared_norms_.reserve(centroids_.size());
    for (const auto& c : centroids_) {
      if (c.size() != mask_.dimension()) {
        throw TrainingError("centroid dimensionality does not match the similarity mask");
      }
      double s = 0.0;
      for (double x : c) s += x * x;
      squared_norms_.push_back(s);
    }
  }

  std::size_t k() const { return centroids_.size(); }
  std::size_t dimension() const { return mask_.dimension(); }
  const std::vector<std::vector<double>>& centroids() const { return centroids_; }
  const SimilarityFeatureMask& feature_mask() const { return mask_; }

  /// Squared Euclidean distance between a masked vector and centroid j.
  double squared_distance(const SparseVector& v, std::size_t j) const {
    const double d = v.squared_norm() - 2.0 * v.dot(centroids_[j]) + squared_norms_[j];
    return d > 0.0 ? d : 0.0;
  }

  bool operator==(const CentroidSet& o) const {
    return centroids_ == o.centroids_ && mask_ == o.mask_;
  }

 private:
  std::vector<std::vector<double>> centroids_;
  std::vector<double> squared_norms_;
  SimilarityFeatureMask mask_;
};

/// Nearest centroid by squared Euclidean distance; ties go to the lower
/// index.
inline std::size_t nearest_cluster(const SparseVector& masked, const CentroidSet& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.k(); ++j) {
    const double d = centroids.squared_distance(masked, j);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;
  double wcss = 0.0;
  std::size_t iterations = 0;
  /// WCSS after each centroid update of the selected run.
  std::vector<double> wcss_trace;
};

namespace detail {

inline bool sparse_less(const SparseVector& a, const SparseVector& b) {
  return std::lexicographical_compare(
      a.entries.begin(), a.entries.end(), b.entries.begin(), b.entries.end(),
      [](const SparseEntry& x, const SparseEntry& y) {
        return x.id != y.id ? x.id < y.id : x.weight < y.weight;
      });
}

inline double sparse_dense_sq_distance(const SparseVector& v, std::span<const double> c) {
  double d = 0.0;
  std::size_t next = 0;
  for (const auto& e : v.entries) {
    for (; next < e.id; ++next) d += c[next] * c[next];
    const double diff = e.weight - c[e.id];
    d += diff * diff;
    next = e.id + 1;
  }
  for (; next < c.size(); ++next) d += c[next] * c[next];
  return d;
}

class LloydRun {
 public:
  LloydRun(std::span<const SparseVector> points, std::size_t dim, std::size_t k)
      : points_(points), dim_(dim), k_(k) {}

  KMeansResult run(Seed seed, std::size_t max_iterations) {
    Rng rng(seed);
    KMeansResult r;
    r.centroids = seed_plus_plus(rng);
    r.assignment = assign(r.centroids);
    reseed_empty(r.assignment, r.centroids);
    for (std::size_t it = 0; it < max_iterations; ++it) {
      r.centroids = means(r.assignment);
      r.wcss_trace.push_back(wcss(r.assignment, r.centroids));
      ++r.iterations;
      auto next = assign(r.centroids);
      reseed_empty(next, r.centroids);
      if (next == r.assignment) break;
      r.assignment = std::move(next);
    }
    r.centroids = means(r.assignment);
    r.wcss = wcss(r.assignment, r.centroids);
    return r;
  }

 private:
  std::vector<double> dense(const SparseVector& v) const {
    std::vector<double> out(dim_, 0.0);
    for (const auto& e : v.entries) out[e.id] = e.weight;
    return out;
  }

  std::vector<std::vector<double>> seed_plus_plus(Rng& rng) const {
    const std::size_t n = points_.size();
    std::vector<std::vector<double>> centers;
    centers.push_back(dense(points_[rng.below(n)]));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k_) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], sparse_dense_sq_distance(points_[i], centers.back()));
        total += nearest[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (nearest[i] <= 0.0) continue;
          pick = i;  // last positive-weight point, in case rounding overshoots
          acc += nearest[i];
          if (acc > target) break;
        }
      } else {
        pick = rng.below(n);
      }
      centers.push_back(dense(points_[pick]));
    }
    return centers;
  }

  std::vector<std::size_t> assign(const std::vector<std::vector<double>>& centroids) const {
    std::vector<double> sq(centroids.size());
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      double s = 0.0;
      for (double x : centroids[j]) s += x * x;
      sq[j] = s;
    }
    std::vector<std::size_t> out(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double pn = points_[i].squared_norm();
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centroids.size(); ++j) {
        double d = pn - 2.0 * points_[i].dot(centroids[j]) + sq[j];
        if (d < 0.0) d = 0.0;
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      out[i] = best;
    }
    return out;
  }

  /// Gives every empty cluster the point lying farthest from its current
  /// centroid, taken from a cluster that can spare it.
  void reseed_empty(std::vector<std::size_t>& labels,
                    std::vector<std::vector<double>>& centroids) const {
    std::vector<std::size_t> sizes(k_, 0);
    for (auto l : labels) ++sizes[l];
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = points_.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (sizes[labels[i]] < 2) continue;
        const double d = sparse_dense_sq_distance(points_[i], centroids[labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == points_.size()) break;
      --sizes[labels[far]];
      labels[far] = j;
      sizes[j] = 1;
      centroids[j] = dense(points_[far]);
    }
  }

  std::vector<std::vector<double>> means(const std::vector<std::size_t>& labels) const {
    std::vector<std::vector<double>> c(k_, std::vector<double>(dim_, 0.0));
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      ++sizes[labels[i]];
      for (const auto& e : points_[i].entries) c[labels[i]][e.id] += e.weight;
    }
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes[j] == 0) continue;
      const double inv = 1.0 / static_cast<double>(sizes[j]);
      for (auto& x : c[j]) x *= inv;
    }
    return c;
  }

  double wcss(const std::vector<std::size_t>& labels,
              const std::vector<std::vector<double>>& centroids) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      s += sparse_dense_sq_distance(points_[i], centroids[labels[i]]);
    }
    return s;
  }

  std::span<const SparseVector> points_;
  std::size_t dim_;
  std::size_t k_;
};

}  // namespace detail

inline std::size_t count_distinct(std::span<const SparseVector> vectors) {
  std::vector<const SparseVector*> ptrs;
  ptrs.reserve(vectors.size());
  for (const auto& v : vectors) ptrs.push_back(&v);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const SparseVector* a, const SparseVector* b) { return detail::sparse_less(*a, *b); });
  auto last = std::unique(ptrs.begin(), ptrs.end(),
                          [](const SparseVector* a, const SparseVector* b) { return *a == *b; });
  return static_cast<std::size_t>(last - ptrs.begin());
}

/// Lloyd's algorithm from k-means++ seeds; keeps the restart with the lowest
/// within-cluster sum of squares (ties: earliest restart).
inline KMeansResult kmeans_fit(std::span<const SparseVector> vectors, std::size_t dimension,
                               std::size_t k, Seed seed, const KMeansOptions& options = {}) {
  if (k == 0) throw TrainingError("k-means needs k >= 1");
  const std::size_t distinct = count_distinct(vectors);
  if (k > distinct) {
    throw TrainingError("k-means: k = " + std::to_string(k) + " exceeds the " +
                        std::to_string(distinct) + " distinct input vectors");
  }
  for (const auto& v : vectors) {
    if (!v.empty() && v.entries.back().id >= dimension) {
      throw TrainingError("k-means: vector id outside the declared dimension");
    }
  }
  detail::LloydRun lloyd(vectors, dimension, k);
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    auto run = lloyd.run(derive_seed(seed, r), options.max_iterations);
    if (!have || run.wcss < best.wcss) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

struct SimilarityClusterGroup {
  std::size_t k = 1;
  std::vector<std::size_t> assignment;
  CentroidSet centroids;
  double p_used = 0.6;
  /// Number of k-means fits performed while searching.
  std::size_t clustering_runs = 0;
};

/// True when every cluster holds at least two distinct labels.
inline bool every_cluster_mixed(std::span<const std::size_t> assignment,
                                std::span<const SecurityLabel> labels, std::size_t k) {
  std::vector<std::array<bool, kNumLabels>> seen(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) seen[assignment[i]][index_of(labels[i])] = true;
  return std::all_of(seen.begin(), seen.end(), [](const auto& s) {
    return std::count(s.begin(), s.end(), true) >= 2;
  });
}

struct GroupOptions {
  double p_start = 0.6;
  KMeansOptions kmeans;
};

/// Produces the first clustering in which every cluster mixes at least two
/// labels. For each k from k_init downward the similarity fraction p is
/// lowered in steps of 0.1 (while p > 0.01), re-clustering at each level;
/// k = 1 always succeeds.
inline SimilarityClusterGroup generate_similarity_cluster_group(
    std::span<const SparseVector> tfidf_vectors, std::span<const SecurityLabel> labels,
    const TfIdfModel& tfidf, std::size_t k_init, Seed seed, const GroupOptions& options = {}) {
  if (tfidf_vectors.size() != labels.size()) {
    throw TrainingError("cluster group: vector and label counts differ");
  }
  {
    std::array<bool, kNumLabels> seen{};
    for (auto l : labels) seen[index_of(l)] = true;
    if (std::count(seen.begin(), seen.end(), true) < 2) {
      throw TrainingError("cluster group: corpus needs at least two distinct labels");
    }
  }
  const auto p_start_tenths = static_cast<int>(std::llround(options.p_start * 10.0));
  SimilarityClusterGroup group;
  std::size_t runs = 0;

  const auto attempt = [&](std::size_t k, double p, std::uint64_t stream) -> bool {
    auto mask = select_similarity_features(tfidf, tfidf_vectors, p);
    std::vector<SparseVector> masked;
    masked.reserve(tfidf_vectors.size());
    for (const auto& v : tfidf_vectors) masked.push_back(apply_mask(v, mask));
    if (count_distinct(masked) < k) return false;
    auto fit = kmeans_fit(masked, mask.dimension(), k, derive_seed(seed, stream), options.kmeans);
    ++runs;
    if (k > 1 && !every_cluster_mixed(fit.assignment, labels, k)) return false;
    group.k = k;
    group.assignment = std::move(fit.assignment);
    group.centroids = CentroidSet(std::move(fit.centroids), std::move(mask));
    group.p_used = p;
    return true;
  };

  for (std::size_t k = std::max<std::size_t>(1, k_init); k > 1; --k) {
    for (int tenths = p_start_tenths; tenths >= 1; --tenths) {
      const double p = (tenths == p_start_tenths) ? options.p_start : tenths / 10.0;
      if (attempt(k, p, k * 16 + static_cast<std::uint64_t>(tenths))) {
        group.clustering_runs = runs;
        return group;
      }
    }
  }
  attempt(1, options.p_start, 0);
  group.clustering_runs = runs;
  return group;
}

/// One similarity cluster per hundred paragraphs.
constexpr std::size_t default_k(std::size_t n_paragraphs) {
  return std::max<std::size_t>(1, n_paragraphs / 100);
}

}  // namespace acess
