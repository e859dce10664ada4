#pragma once

// Confusion counts, per-class metrics, stratified folds, per-cluster
// cross-validated grid search and micro-aggregation of cluster results.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "acess/classifiers.hpp"
#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/features.hpp"
#include "acess/random.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

/// Per-class one-vs-rest counts. A prediction c' for truth c adds a false
/// positive to c' and a false negative to c.
struct ConfusionCounts {
  std::array<std::uint64_t, kNumLabels> tp{};
  std::array<std::uint64_t, kNumLabels> fp{};
  std::array<std::uint64_t, kNumLabels> fn{};
  std::array<std::uint64_t, kNumLabels> support{};

  bool operator==(const ConfusionCounts&) const = default;

  void add(SecurityLabel truth, SecurityLabel predicted) {
    const auto t = index_of(truth);
    const auto p = index_of(predicted);
    ++support[t];
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      tp[c] += o.tp[c];
      fp[c] += o.fp[c];
      fn[c] += o.fn[c];
      support[c] += o.support[c];
    }
    return *this;
  }

  std::uint64_t instances() const { return std::accumulate(support.begin(), support.end(), 0ULL); }
};

struct ClassMetrics {
  std::array<double, kNumLabels> precision{};
  std::array<double, kNumLabels> recall{};
  std::array<double, kNumLabels> f1{};

  bool operator==(const ClassMetrics&) const = default;

  /// Unweighted mean of the per-class F1 values.
  double mean_f1() const { return (f1[0] + f1[1] + f1[2]) / 3.0; }
};

namespace detail {
inline double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

/// Precision, recall and F1 per class; every 0/0 is defined as 0.
inline ClassMetrics compute_metrics(const ConfusionCounts& counts) {
  ClassMetrics m;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    m.precision[c] = detail::ratio(counts.tp[c], counts.tp[c] + counts.fp[c]);
    m.recall[c] = detail::ratio(counts.tp[c], counts.tp[c] + counts.fn[c]);
    const double s = m.precision[c] + m.recall[c];
    m.f1[c] = s == 0.0 ? 0.0 : 2.0 * m.precision[c] * m.recall[c] / s;
  }
  return m;
}

struct FoldPlan {
  std::size_t n_folds = 10;
  std::vector<std::size_t> assignments;
  Seed seed = 0;

  std::vector<std::size_t> members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] == fold) out.push_back(i);
    }
    return out;
  }
};

/// Shuffles each class independently and deals it round-robin across the
/// folds, continuing the deal where the previous class stopped, so every
/// fold holds floor or ceil of (class total / n_folds) of each class.
inline FoldPlan stratified_folds(std::span<const SecurityLabel> labels, std::size_t n_folds,
                                 Seed seed) {
  if (n_folds < 2) throw UsageError("stratified folds: need at least two folds");
  if (n_folds > labels.size()) {
    throw TrainingError("stratified folds: " + std::to_string(n_folds) + " folds exceed " +
                        std::to_string(labels.size()) + " instances");
  }
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t next = 0;
  for (auto label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) {
      plan.assignments[i] = next;
      next = (next + 1) % n_folds;
    }
  }
  return plan;
}

/// One fold per instance.
inline FoldPlan leave_one_out(std::size_t n, Seed seed) {
  FoldPlan plan;
  plan.n_folds = n;
  plan.seed = seed;
  plan.assignments.resize(n);
  std::iota(plan.assignments.begin(), plan.assignments.end(), std::size_t{0});
  return plan;
}

/// Stratified folds, or leave-one-out when there are fewer instances than
/// folds.
inline FoldPlan plan_folds(std::span<const SecurityLabel> labels, std::size_t n_folds, Seed seed) {
  if (labels.size() < n_folds) return leave_one_out(labels.size(), seed);
  return stratified_folds(labels, n_folds, seed);
}

/// Grid points in evaluation order: feature fractions outer, classifier
/// knob inner.
inline std::vector<Hyperparameters> make_grid(ClassifierKind kind,
                                              std::span<const double> fractions,
                                              std::span<const double> c_grid,
                                              std::span<const double> alpha_grid) {
  std::vector<Hyperparameters> grid;
  for (double f : fractions) {
    if (kind == ClassifierKind::Svm) {
      for (double c : c_grid) grid.push_back({f, c, 1.0});
    } else {
      for (double a : alpha_grid) grid.push_back({f, 1.0, a});
    }
  }
  if (grid.empty()) throw UsageError("hyperparameter grid is empty");
  return grid;
}

struct CvResult {
  std::size_t best_index = 0;
  Hyperparameters best;
  ConfusionCounts counts;
  /// Mean per-class F1 of every grid point, in grid order.
  std::vector<double> grid_mean_f1;
  bool constant_predictor = false;
};

/// Cross-validated grid search over one cluster. Each fold ranks and
/// selects features from its training split only, trains every grid point
/// and scores the held-out split. The grid point with the highest mean
/// per-class F1 wins (ties: earlier grid point); its pooled held-out counts
/// are returned.
inline CvResult cross_validate_cluster(std::span<const SparseVector> tf_vectors,
                                       std::span<const SecurityLabel> labels,
                                       std::size_t n_features,
                                       std::span<const Hyperparameters> grid,
                                       const FoldPlan& plan, const ClassifierTraining& how,
                                       Seed seed) {
  if (grid.empty()) throw UsageError("cross-validation: empty grid");
  if (tf_vectors.size() != labels.size() || plan.assignments.size() != labels.size()) {
    throw TrainingError("cross-validation: inconsistent input sizes");
  }
  std::vector<ConfusionCounts> per_grid(grid.size());
  bool any_constant = false;

  for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
    std::vector<SparseVector> train_x;
    std::vector<SecurityLabel> train_y;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (plan.assignments[i] == fold) {
        held_out.push_back(i);
      } else {
        train_x.push_back(tf_vectors[i]);
        train_y.push_back(labels[i]);
      }
    }
    if (held_out.empty()) continue;

    std::array<bool, kNumLabels> seen{};
    for (auto l : train_y) seen[index_of(l)] = true;
    if (std::count(seen.begin(), seen.end(), true) < 2) {
      // Single-label training split: every grid point is the constant
      // predictor for that label.
      any_constant = true;
      const auto only = train_y.empty() ? SecurityLabel::Unclassified : train_y.front();
      for (auto& counts : per_grid) {
        for (auto i : held_out) counts.add(labels[i], only);
      }
      continue;
    }

    const auto ranking = rank_features(train_x, train_y, n_features);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto map = select_cluster_features(ranking, grid[g].feature_fraction);
      std::vector<SparseVector> mapped;
      mapped.reserve(train_x.size());
      for (const auto& v : train_x) mapped.push_back(map.project(v));
      const auto model = train_classifier(mapped, train_y, map.size(), grid[g], how,
                                          derive_seed(seed, fold * 1000 + g));
      for (auto i : held_out) per_grid[g].add(labels[i], predict(model, map.project(tf_vectors[i])));
    }
  }

  CvResult result;
  result.constant_predictor = any_constant;
  double best = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double f = compute_metrics(per_grid[g]).mean_f1();
    result.grid_mean_f1.push_back(f);
    if (f > best) {
      best = f;
      result.best_index = g;
    }
  }
  result.best = grid[result.best_index];
  result.counts = per_grid[result.best_index];
  return result;
}

struct GroupReport {
  std::size_t k = 0;
  std::vector<ConfusionCounts> per_cluster;
  ConfusionCounts aggregate;
  ClassMetrics aggregate_metrics;
  double mean_f1 = 0.0;
};

/// Micro-aggregation: sum the per-cluster counts, then compute metrics.
inline GroupReport aggregate_group(std::span<const ConfusionCounts> per_cluster) {
  if (per_cluster.empty()) throw TrainingError("aggregate_group: no clusters");
  GroupReport report;
  report.k = per_cluster.size();
  report.per_cluster.assign(per_cluster.begin(), per_cluster.end());
  for (const auto& c : per_cluster) report.aggregate += c;
  report.aggregate_metrics = compute_metrics(report.aggregate);
  report.mean_f1 = report.aggregate_metrics.mean_f1();
  return report;
}

/// Highest mean F1; ties go to the smaller k.
inline const GroupReport& select_optimal_group(std::span<const GroupReport> reports) {
  if (reports.empty()) throw TrainingError("select_optimal_group: no reports");
  const GroupReport* best = &reports.front();
  for (const auto& r : reports) {
    if (r.mean_f1 > best->mean_f1 || (r.mean_f1 == best->mean_f1 && r.k < best->k)) best = &r;
  }
  return *best;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline void write_report_header(std::ostream& out) {
  out << "dataset,k,scope,class,tp,fp,fn,support,precision,recall,f1\n";
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

inline void write_rows(std::ostream& out, const std::string& dataset, std::size_t k,
                       const std::string& scope, const ConfusionCounts& counts) {
  const auto m = compute_metrics(counts);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    out << csv_field(dataset) << ',' << k << ',' << scope << ',' << display_name(label_from_index(c)) << ','
        << counts.tp[c] << ',' << counts.fp[c] << ',' << counts.fn[c] << ',' << counts.support[c]
        << ',' << format_double(m.precision[c]) << ',' << format_double(m.recall[c]) << ','
        << format_double(m.f1[c]) << '\n';
  }
}
}  // namespace detail

/// Per-cluster rows (scope = cluster index) followed by the aggregate rows.
inline void write_report_rows(std::ostream& out, const std::string& dataset,
                              const GroupReport& report) {
  for (std::size_t j = 0; j < report.per_cluster.size(); ++j) {
    detail::write_rows(out, dataset, report.k, std::to_string(j), report.per_cluster[j]);
  }
  detail::write_rows(out, dataset, report.k, "aggregate", report.aggregate);
}

}  // namespace acess
