#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

/// Multinomial Naive Bayes with additive (Laplace) smoothing. Classes absent
/// from training have a log prior of -inf and never win.
struct MultinomialNb {
  std::array<double, kNumLabels> log_priors{};
  std::array<std::vector<double>, kNumLabels> log_likelihoods;
  double alpha = 1.0;

  bool operator==(const MultinomialNb&) const = default;

  bool has_class(SecurityLabel l) const { return std::isfinite(log_priors[index_of(l)]); }
};

inline MultinomialNb train_nb(std::span<const SparseVector> vectors,
                              std::span<const SecurityLabel> labels, std::size_t dimension,
                              double alpha) {
  if (vectors.size() != labels.size()) throw TrainingError("nb: vector and label counts differ");
  if (vectors.empty()) throw TrainingError("nb: no training examples");
  if (!(alpha > 0.0)) throw UsageError("nb: alpha must be positive");

  MultinomialNb model;
  model.alpha = alpha;
  std::array<std::size_t, kNumLabels> class_count{};
  std::array<std::vector<double>, kNumLabels> counts;
  for (auto& c : counts) c.assign(dimension, 0.0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto c = index_of(labels[i]);
    ++class_count[c];
    for (const auto& e : vectors[i].entries) {
      if (e.id >= dimension) throw TrainingError("nb: feature id outside the declared dimension");
      counts[c][e.id] += e.weight;
    }
  }
  const double n = static_cast<double>(vectors.size());
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    if (class_count[c] == 0) {
      model.log_priors[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    model.log_priors[c] = std::log(static_cast<double>(class_count[c]) / n);
    double total = 0.0;
    for (double v : counts[c]) total += v;
    const double denom = total + alpha * static_cast<double>(dimension);
    auto& ll = model.log_likelihoods[c];
    ll.resize(dimension);
    for (std::size_t t = 0; t < dimension; ++t) ll[t] = std::log((counts[c][t] + alpha) / denom);
  }
  return model;
}

/// Joint log score log P(c) + sum_t tf_t log P(t|c) for every class.
inline std::array<double, kNumLabels> nb_log_scores(const MultinomialNb& model,
                                                    const SparseVector& x) {
  std::array<double, kNumLabels> scores{};
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    scores[c] = model.log_priors[c];
    if (!std::isfinite(scores[c])) continue;
    for (const auto& e : x.entries) {
      if (e.id < model.log_likelihoods[c].size()) {
        scores[c] += e.weight * model.log_likelihoods[c][e.id];
      }
    }
  }
  return scores;
}

/// Highest joint log score; ties go to the lower label.
inline SecurityLabel predict_nb(const MultinomialNb& model, const SparseVector& x) {
  const auto scores = nb_log_scores(model, x);
  std::size_t best = kNumLabels;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    if (!std::isfinite(scores[c])) continue;
    if (best == kNumLabels || scores[c] > scores[best]) best = c;
  }
  if (best == kNumLabels) throw TrainingError("nb: model has no classes");
  return label_from_index(best);
}

}  // namespace acess
