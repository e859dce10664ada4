#pragma once

// Cluster-local security features: rank term-frequency features by their
// Pearson correlation with the class, keep the top fraction.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

/// Sample Pearson correlation; 0 when either series is constant.
inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("pearson_correlation: series lengths differ");
  if (x.size() < 2) throw UsageError("pearson_correlation: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

struct FeatureRanking {
  /// Indexed by feature id; unscored ids hold 0.
  std::vector<double> scores;
  /// Scored ids by descending score, ties by ascending id.
  std::vector<FeatureId> order;
};

/// Scores every feature that occurs in `tf_vectors` by the class-prior
/// weighted mean of |r| between its counts and each class indicator.
/// With two classes this is plain |r|.
inline FeatureRanking rank_features(std::span<const SparseVector> tf_vectors,
                                    std::span<const SecurityLabel> labels,
                                    std::size_t n_features) {
  if (tf_vectors.size() != labels.size()) {
    throw TrainingError("rank_features: vector and label counts differ");
  }
  if (tf_vectors.size() < 2) throw TrainingError("rank_features: need at least two paragraphs");
  std::array<std::size_t, kNumLabels> class_count{};
  for (auto l : labels) ++class_count[index_of(l)];
  if (std::count_if(class_count.begin(), class_count.end(), [](auto c) { return c > 0; }) < 2) {
    throw TrainingError("rank_features: need at least two distinct labels");
  }

  // Per-feature sums over the sparse entries. With integer counts every sum
  // below is exact, so the correlation is reproducible bit-for-bit under
  // uniform rescaling of the counts.
  std::vector<double> sum_x(n_features, 0.0), sum_xx(n_features, 0.0);
  std::vector<std::array<double, kNumLabels>> sum_xy(n_features);
  std::vector<bool> occurs(n_features, false);
  for (std::size_t i = 0; i < tf_vectors.size(); ++i) {
    const auto c = index_of(labels[i]);
    for (const auto& e : tf_vectors[i].entries) {
      if (e.id >= n_features) throw TrainingError("rank_features: feature id out of range");
      occurs[e.id] = true;
      sum_x[e.id] += e.weight;
      sum_xx[e.id] += e.weight * e.weight;
      sum_xy[e.id][c] += e.weight;
    }
  }

  const double n = static_cast<double>(tf_vectors.size());
  FeatureRanking ranking;
  ranking.scores.assign(n_features, 0.0);
  for (std::size_t f = 0; f < n_features; ++f) {
    if (!occurs[f]) continue;
    ranking.order.push_back(static_cast<FeatureId>(f));
    const double var_x = n * sum_xx[f] - sum_x[f] * sum_x[f];
    if (var_x <= 0.0) continue;
    double score = 0.0;
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      if (class_count[c] == 0) continue;
      const double ny = static_cast<double>(class_count[c]);
      const double var_y = n * ny - ny * ny;
      if (var_y <= 0.0) continue;
      const double cov = n * sum_xy[f][c] - sum_x[f] * ny;
      const double r = std::min(1.0, std::abs(cov) / (std::sqrt(var_x) * std::sqrt(var_y)));
      score += (ny / n) * r;
    }
    ranking.scores[f] = std::min(1.0, score);
  }
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](FeatureId a, FeatureId b) {
    return ranking.scores[a] > ranking.scores[b];
  });
  return ranking;
}

/// Kept security features of one cluster (or of the whole corpus for the
/// baseline), in ascending id order. Position in kept_ids is the column the
/// classifier sees.
struct ClusterFeatureMap {
  std::vector<FeatureId> kept_ids;
  double fraction = 1.0;

  bool operator==(const ClusterFeatureMap&) const = default;

  std::size_t size() const { return kept_ids.size(); }

  /// Restricts a vocabulary-space tf vector to the kept columns.
  SparseVector project(const SparseVector& tf) const {
    SparseVector out;
    std::size_t j = 0;
    for (const auto& e : tf.entries) {
      while (j < kept_ids.size() && kept_ids[j] < e.id) ++j;
      if (j == kept_ids.size()) break;
      if (kept_ids[j] == e.id) out.entries.push_back({static_cast<FeatureId>(j), e.weight});
    }
    return out;
  }
};

inline ClusterFeatureMap select_cluster_features(const FeatureRanking& ranking, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("feature fraction must lie in (0, 1]");
  }
  ClusterFeatureMap map;
  map.fraction = fraction;
  const auto n = kept_count(fraction, ranking.order.size());
  map.kept_ids.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(map.kept_ids.begin(), map.kept_ids.end());
  return map;
}

}  // namespace acess
