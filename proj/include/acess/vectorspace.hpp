#pragma once

// Vocabulary, sparse term-frequency / TF-IDF vectors and the similarity
// feature mask used to define the clustering space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "acess/error.hpp"
#include "acess/textprep.hpp"

namespace acess {

using FeatureId = std::uint32_t;

struct SparseEntry {
  FeatureId id;
  double weight;

  bool operator==(const SparseEntry&) const = default;
};

/// Sorted (id, weight) pairs. Ids strictly increase and no zero weight is
/// stored.
struct SparseVector {
  std::vector<SparseEntry> entries;

  bool operator==(const SparseVector&) const = default;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.weight;
    return s;
  }

  double weight_of(FeatureId id) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), id,
                               [](const SparseEntry& e, FeatureId v) { return e.id < v; });
    return (it != entries.end() && it->id == id) ? it->weight : 0.0;
  }

  /// Dot product with a dense vector indexed by feature id.
  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * dense[e.id];
    return s;
  }
};

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Terms must be unique; they are stored in lexicographic order.
  explicit Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    if (std::adjacent_find(terms_.begin(), terms_.end()) != terms_.end()) {
      throw ParseError("vocabulary contains duplicate terms");
    }
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      index_.emplace(terms_[i], static_cast<FeatureId>(i));
    }
  }

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(FeatureId id) const { return terms_.at(id); }

  std::optional<FeatureId> find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, FeatureId> index_;
};

inline Vocabulary build_vocabulary(std::span<const TokenList> token_lists) {
  std::vector<std::string> terms;
  for (const auto& tokens : token_lists) terms.insert(terms.end(), tokens.begin(), tokens.end());
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty()) throw TrainingError("cannot build a vocabulary from empty token lists");
  return Vocabulary(std::move(terms));
}

/// Raw in-vocabulary token counts. Unknown tokens are dropped.
inline SparseVector term_frequency(const TokenList& tokens, const Vocabulary& vocab) {
  std::map<FeatureId, double> counts;
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) counts[*id] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  for (const auto& [id, c] : counts) v.entries.push_back({id, c});
  return v;
}

struct TfIdfModel {
  Vocabulary vocabulary;
  std::vector<double> idf;
  std::size_t n_paragraphs_fit = 0;

  bool operator==(const TfIdfModel&) const = default;
};

/// idf(t) = ln(N / df(t)) + 1, with paragraphs as the documents.
inline TfIdfModel fit_tfidf(std::span<const TokenList> token_lists, const Vocabulary& vocab) {
  std::vector<std::size_t> df(vocab.size(), 0);
  for (const auto& tokens : token_lists) {
    auto tf = term_frequency(tokens, vocab);
    for (const auto& e : tf.entries) ++df[e.id];
  }
  TfIdfModel model;
  model.vocabulary = vocab;
  model.n_paragraphs_fit = token_lists.size();
  model.idf.resize(vocab.size());
  const double n = static_cast<double>(token_lists.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    if (df[t] == 0) {
      throw TrainingError("term \"" + vocab.term(static_cast<FeatureId>(t)) +
                          "\" never occurs in the fitting paragraphs");
    }
    model.idf[t] = std::log(n / static_cast<double>(df[t])) + 1.0;
  }
  return model;
}

/// Scales every weight so the vector has unit L2 norm; zero stays zero.
inline void l2_normalize(SparseVector& v) {
  const double norm = std::sqrt(v.squared_norm());
  if (norm == 0.0) return;
  for (auto& e : v.entries) e.weight /= norm;
}

inline SparseVector transform_tfidf(const SparseVector& tf, const TfIdfModel& model) {
  SparseVector out;
  out.entries.reserve(tf.size());
  for (const auto& e : tf.entries) {
    const double w = e.weight * model.idf.at(e.id);
    if (w != 0.0) out.entries.push_back({e.id, w});
  }
  l2_normalize(out);
  return out;
}

/// Subset of vocabulary ids spanning the clustering space.
struct SimilarityFeatureMask {
  std::vector<FeatureId> kept_ids;  // sorted
  double fraction_p = 1.0;

  bool operator==(const SimilarityFeatureMask&) const = default;

  std::size_t dimension() const { return kept_ids.size(); }
};

/// max(1, round(fraction * n)), never more than n.
inline std::size_t kept_count(double fraction, std::size_t n) {
  if (n == 0) return 0;
  const auto r = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(r, 1, n);
}

/// Ranks features by their largest TF-IDF weight over the training vectors
/// (ties: lower id first) and keeps the top round(p * |V|).
inline SimilarityFeatureMask select_similarity_features(
    const TfIdfModel& model, std::span<const SparseVector> training_vectors, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw UsageError("similarity fraction p must lie in (0, 1]");
  const std::size_t n = model.vocabulary.size();
  std::vector<double> score(n, 0.0);
  for (const auto& v : training_vectors) {
    for (const auto& e : v.entries) score[e.id] = std::max(score[e.id], e.weight);
  }
  std::vector<FeatureId> order(n);
  std::iota(order.begin(), order.end(), FeatureId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](FeatureId a, FeatureId b) { return score[a] > score[b]; });
  SimilarityFeatureMask mask;
  mask.fraction_p = p;
  mask.kept_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept_count(p, n)));
  std::sort(mask.kept_ids.begin(), mask.kept_ids.end());
  return mask;
}

/// Projects a vocabulary-space vector into the mask's subspace (ids become
/// positions within kept_ids) and renormalizes it to unit length.
inline SparseVector apply_mask(const SparseVector& v, const SimilarityFeatureMask& mask) {
  SparseVector out;
  std::size_t j = 0;
  for (const auto& e : v.entries) {
    while (j < mask.kept_ids.size() && mask.kept_ids[j] < e.id) ++j;
    if (j == mask.kept_ids.size()) break;
    if (mask.kept_ids[j] == e.id) out.entries.push_back({static_cast<FeatureId>(j), e.weight});
  }
  l2_normalize(out);
  return out;
}

}  // namespace acess
