#pragma once

// L2-regularized hinge-loss linear SVM trained by dual coordinate descent,
// and the one-vs-one multiclass wrapper.
//
//   min_w  1/2 |w|^2 + C * sum_i max(0, 1 - y_i w.x_i)
//
// The bias is the weight of an implicit constant-1 feature, so it is
// regularized like any other weight and the dual has only box constraints:
//
//   min_a  1/2 a'Qa - sum_i a_i,   0 <= a_i <= C,   Q_ij = y_i y_j (x_i.x_j + 1)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/random.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

struct LinearSvmBinary {
  std::vector<double> weights;
  double bias = 0.0;
  double c_param = 1.0;
  SecurityLabel positive_class = SecurityLabel::Confidential;
  SecurityLabel negative_class = SecurityLabel::Unclassified;

  bool operator==(const LinearSvmBinary&) const = default;

  double decision(const SparseVector& x) const {
    double s = bias;
    for (const auto& e : x.entries) {
      if (e.id < weights.size()) s += e.weight * weights[e.id];
    }
    return s;
  }
};

struct SvmTrainOptions {
  double c_param = 1.0;
  /// Stop once the largest projected-gradient magnitude in an epoch is
  /// at most tol.
  double tol = 1e-4;
  std::size_t max_epochs = 10000;
  Seed seed = 0;
  /// Record the dual objective (minimization form) after every epoch.
  bool trace = false;
};

struct SvmTrainResult {
  LinearSvmBinary model;
  std::vector<double> alpha;
  std::size_t epochs = 0;
  bool converged = false;
  double max_violation = 0.0;
  /// sum(alpha) - 1/2 |w|^2 (including the bias weight) at termination.
  double dual_objective = 0.0;
  std::vector<double> objective_trace;
};

/// Trains on `vectors` (columns 0..dimension-1) with labels y in {-1, +1}.
inline SvmTrainResult train_svm_binary(std::span<const SparseVector> vectors,
                                       std::span<const int> y, std::size_t dimension,
                                       const SvmTrainOptions& options) {
  if (vectors.size() != y.size()) throw TrainingError("svm: vector and label counts differ");
  if (!(options.c_param > 0.0)) throw UsageError("svm: C must be positive");
  if (!(options.tol > 0.0)) throw UsageError("svm: tol must be positive");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw TrainingError("svm: need examples of both signs");
  for (int v : y) {
    if (v != 1 && v != -1) throw TrainingError("svm: labels must be +1 or -1");
  }

  const std::size_t n = vectors.size();
  const double c = options.c_param;
  std::vector<double> w(dimension, 0.0);
  double w_bias = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : vectors[i].entries) {
      if (e.id >= dimension) throw TrainingError("svm: feature id outside the declared dimension");
    }
    qdiag[i] = vectors[i].squared_norm() + 1.0;
  }

  const auto margin = [&](std::size_t i) {
    double s = w_bias;
    for (const auto& e : vectors[i].entries) s += e.weight * w[e.id];
    return s;
  };
  const auto dual_min_objective = [&] {
    double ww = w_bias * w_bias;
    for (double v : w) ww += v * v;
    return 0.5 * ww - std::accumulate(alpha.begin(), alpha.end(), 0.0);
  };

  SvmTrainResult result;
  Rng rng(options.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double max_violation = 0.0;
    for (std::size_t i : order) {
      const double g = y[i] * margin(i) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= c) {
        pg = std::max(g, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(pg));
      if (std::abs(pg) <= 1e-15) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qdiag[i], 0.0, c);
      const double delta = (alpha[i] - old) * y[i];
      if (delta == 0.0) continue;
      for (const auto& e : vectors[i].entries) w[e.id] += delta * e.weight;
      w_bias += delta;
    }
    ++result.epochs;
    result.max_violation = max_violation;
    if (options.trace) result.objective_trace.push_back(dual_min_objective());
    if (max_violation <= options.tol) {
      result.converged = true;
      break;
    }
  }

  result.dual_objective = -dual_min_objective();
  result.model.weights = std::move(w);
  result.model.bias = w_bias;
  result.model.c_param = c;
  result.alpha = std::move(alpha);
  return result;
}

/// Pairwise machines over the labels present in training. With a single
/// label present it is a constant predictor.
struct OneVsOneSvm {
  std::vector<SecurityLabel> classes_present;  // ascending
  std::vector<LinearSvmBinary> pairwise;

  bool operator==(const OneVsOneSvm&) const = default;
};

struct OvoTrainReport {
  std::size_t machines = 0;
  std::size_t unconverged = 0;
};

inline OneVsOneSvm train_ovo(std::span<const SparseVector> vectors,
                             std::span<const SecurityLabel> labels, std::size_t dimension,
                             const SvmTrainOptions& options, OvoTrainReport* report = nullptr) {
  if (vectors.size() != labels.size()) throw TrainingError("ovo: vector and label counts differ");
  if (vectors.empty()) throw TrainingError("ovo: no training examples");
  OneVsOneSvm model;
  std::array<bool, kNumLabels> present{};
  for (auto l : labels) present[index_of(l)] = true;
  for (auto l : kAllLabels) {
    if (present[index_of(l)]) model.classes_present.push_back(l);
  }
  std::size_t pair_index = 0;
  for (std::size_t a = 0; a < model.classes_present.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes_present.size(); ++b, ++pair_index) {
      const auto neg = model.classes_present[a];
      const auto pos = model.classes_present[b];
      std::vector<SparseVector> xs;
      std::vector<int> ys;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == pos || labels[i] == neg) {
          xs.push_back(vectors[i]);
          ys.push_back(labels[i] == pos ? 1 : -1);
        }
      }
      auto opts = options;
      opts.seed = derive_seed(options.seed, pair_index);
      auto trained = train_svm_binary(xs, ys, dimension, opts);
      trained.model.positive_class = pos;
      trained.model.negative_class = neg;
      if (report != nullptr) {
        ++report->machines;
        if (!trained.converged) ++report->unconverged;
      }
      model.pairwise.push_back(std::move(trained.model));
    }
  }
  return model;
}

/// Majority vote of the pairwise machines (a machine votes for its positive
/// class when its decision value is > 0). Ties go to the label with the
/// larger summed |decision| over the machines that voted for it, then to
/// the lower label.
inline SecurityLabel predict_ovo(const OneVsOneSvm& model, const SparseVector& x) {
  if (model.classes_present.empty()) throw TrainingError("ovo: model has no classes");
  if (model.classes_present.size() == 1) return model.classes_present.front();
  std::array<int, kNumLabels> votes{};
  std::array<double, kNumLabels> margins{};
  for (const auto& m : model.pairwise) {
    const double f = m.decision(x);
    const auto winner = f > 0.0 ? m.positive_class : m.negative_class;
    ++votes[index_of(winner)];
    margins[index_of(winner)] += std::abs(f);
  }
  std::size_t best = index_of(model.classes_present.front());
  for (auto l : model.classes_present) {
    const auto i = index_of(l);
    if (votes[i] > votes[best] || (votes[i] == votes[best] && margins[i] > margins[best])) {
      best = i;
    }
  }
  return label_from_index(best);
}

}  // namespace acess
