#pragma once

// End-to-end pipeline: similarity clustering of the training paragraphs,
// one cross-validated classifier per cluster, nearest-cluster routing at
// query time. Also the monolithic baselines and the k sweep.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acess/classifiers.hpp"
#include "acess/clustering.hpp"
#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/evaluation.hpp"
#include "acess/features.hpp"
#include "acess/parallel.hpp"
#include "acess/random.hpp"
#include "acess/textprep.hpp"
#include "acess/vectorspace.hpp"

namespace acess {

inline constexpr int kModelFormatVersion = 1;

struct RunConfig {
  Seed seed = 7;
  std::size_t folds = 10;
  double p_similarity = 0.6;
  std::vector<double> feature_fraction_grid = {0.0001, 0.0005, 0.001, 0.002, 0.004, 0.006, 1.0};
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> alpha_grid = {0.1, 0.5, 1.0};
  ClassifierKind classifier = ClassifierKind::Svm;
  std::size_t kmeans_restarts = 10;
  double svm_tol = 1e-4;
  std::size_t svm_max_epochs = 1000;
  std::size_t threads = 1;

  void validate() const {
    if (folds < 2) throw UsageError("folds must be at least 2");
    if (!(p_similarity > 0.0 && p_similarity <= 1.0)) {
      throw UsageError("p-similarity must lie in (0, 1]");
    }
    const auto check_grid = [](const std::vector<double>& g, const char* name, bool unit) {
      if (g.empty()) throw UsageError(std::string(name) + " grid is empty");
      for (double v : g) {
        if (!(v > 0.0) || (unit && v > 1.0)) {
          throw UsageError(std::string(name) + " grid value out of range");
        }
      }
    };
    check_grid(feature_fraction_grid, "feature-fraction", true);
    check_grid(c_grid, "C", false);
    check_grid(alpha_grid, "alpha", false);
    if (kmeans_restarts == 0) throw UsageError("restarts must be at least 1");
  }

  std::vector<Hyperparameters> grid() const {
    return make_grid(classifier, feature_fraction_grid, c_grid, alpha_grid);
  }

  ClassifierTraining training() const { return {classifier, svm_tol, svm_max_epochs}; }
};

/// Per-cluster seed shared by the pipeline and the baseline so that k = 1
/// reproduces the baseline exactly.
inline Seed cluster_seed(Seed seed, std::size_t cluster) { return derive_seed(seed, 0x100 + cluster); }

/// Token lists, vocabulary, TF-IDF model and both vector views of a corpus.
struct PreparedCorpus {
  std::vector<TokenList> tokens;
  TfIdfModel tfidf;
  std::vector<SparseVector> tf;
  std::vector<SparseVector> tfidf_vectors;
  std::vector<SecurityLabel> labels;
};

inline PreparedCorpus prepare(const Corpus& corpus) {
  require_trainable(corpus);
  PreparedCorpus p;
  p.tokens.reserve(corpus.paragraphs.size());
  for (const auto& rec : corpus.paragraphs) p.tokens.push_back(preprocess(rec.text));
  const auto vocab = build_vocabulary(p.tokens);
  p.tfidf = fit_tfidf(p.tokens, vocab);
  p.tf.reserve(p.tokens.size());
  p.tfidf_vectors.reserve(p.tokens.size());
  for (const auto& t : p.tokens) {
    p.tf.push_back(term_frequency(t, p.tfidf.vocabulary));
    p.tfidf_vectors.push_back(transform_tfidf(p.tf.back(), p.tfidf));
  }
  p.labels = corpus.labels();
  return p;
}

/// Security-feature map plus the classifier trained on it.
struct ClusterModel {
  ClusterFeatureMap feature_map;
  Classifier classifier;
  Hyperparameters hyperparameters;

  SecurityLabel predict_tf(const SparseVector& tf) const {
    return predict(classifier, feature_map.project(tf));
  }
};

struct ClusterTraining {
  ClusterModel model;
  CvResult cv;
};

/// Grid search by cross-validation, then a final fit of the winning grid
/// point on the whole cluster. Single-label clusters become constant
/// predictors.
inline ClusterTraining train_cluster(std::span<const SparseVector> tf,
                                     std::span<const SecurityLabel> labels,
                                     std::size_t n_features, const RunConfig& config, Seed seed,
                                     bool final_fit = true) {
  const auto grid = config.grid();
  const auto how = config.training();
  ClusterTraining out;

  std::array<bool, kNumLabels> seen{};
  for (auto l : labels) seen[index_of(l)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    out.cv.best = grid.front();
    out.cv.constant_predictor = true;
    for (auto l : labels) out.cv.counts.add(l, labels.front());
    out.cv.grid_mean_f1.assign(grid.size(), compute_metrics(out.cv.counts).mean_f1());
    out.model.hyperparameters = grid.front();
    out.model.feature_map.fraction = grid.front().feature_fraction;
    const std::vector<SparseVector> empty(labels.size());
    out.model.classifier = train_classifier(empty, labels, 0, grid.front(), how, seed);
    return out;
  }

  const auto plan = plan_folds(labels, config.folds, derive_seed(seed, 1));
  out.cv = cross_validate_cluster(tf, labels, n_features, grid, plan, how, derive_seed(seed, 2));
  out.model.hyperparameters = out.cv.best;
  if (!final_fit) return out;

  const auto ranking = rank_features(tf, labels, n_features);
  out.model.feature_map = select_cluster_features(ranking, out.cv.best.feature_fraction);
  std::vector<SparseVector> mapped;
  mapped.reserve(tf.size());
  for (const auto& v : tf) mapped.push_back(out.model.feature_map.project(v));
  OvoTrainReport report;
  out.model.classifier = train_classifier(mapped, labels, out.model.feature_map.size(),
                                          out.cv.best, how, derive_seed(seed, 3), &report);
  if (report.unconverged > 0) {
    std::cerr << "warning: " << report.unconverged << " of " << report.machines
              << " SVM machines hit the epoch cap before reaching tol\n";
  }
  return out;
}

struct TrainingManifest {
  std::string corpus_name;
  Seed seed = 0;
  std::size_t n_paragraphs = 0;
  /// "auto" or the requested cluster count.
  std::string requested_k;
  /// Caller-supplied; empty unless set, so that equal inputs give equal files.
  std::string trained_at;

  bool operator==(const TrainingManifest&) const = default;
};

struct AcessModel {
  int format_version = kModelFormatVersion;
  std::string stopword_fingerprint;
  ClassifierKind kind = ClassifierKind::Svm;
  TfIdfModel tfidf;
  CentroidSet centroids;  // carries the similarity feature mask
  std::vector<ClusterModel> per_cluster;
  TrainingManifest manifest;

  std::size_t k() const { return per_cluster.size(); }
};

struct FitResult {
  AcessModel model;
  GroupReport report;
  SimilarityClusterGroup group;
};

namespace detail {

/// CV (and optionally the final fit) of every cluster of a group.
inline std::vector<ClusterTraining> train_group(const PreparedCorpus& data,
                                                const SimilarityClusterGroup& group,
                                                const RunConfig& config, bool final_fit) {
  std::vector<std::vector<std::size_t>> members(group.k);
  for (std::size_t i = 0; i < group.assignment.size(); ++i) members[group.assignment[i]].push_back(i);
  std::vector<ClusterTraining> trained(group.k);
  parallel_for(group.k, config.threads, [&](std::size_t j) {
    std::vector<SparseVector> tf;
    std::vector<SecurityLabel> labels;
    tf.reserve(members[j].size());
    for (auto i : members[j]) {
      tf.push_back(data.tf[i]);
      labels.push_back(data.labels[i]);
    }
    trained[j] = train_cluster(tf, labels, data.tfidf.vocabulary.size(), config,
                               cluster_seed(config.seed, j), final_fit);
  });
  return trained;
}

inline GroupReport report_of(const std::vector<ClusterTraining>& trained) {
  std::vector<ConfusionCounts> counts;
  counts.reserve(trained.size());
  for (const auto& t : trained) counts.push_back(t.cv.counts);
  return aggregate_group(counts);
}

inline SimilarityClusterGroup make_group(const PreparedCorpus& data, std::size_t k,
                                         const RunConfig& config) {
  GroupOptions options;
  options.p_start = config.p_similarity;
  options.kmeans.restarts = config.kmeans_restarts;
  return generate_similarity_cluster_group(data.tfidf_vectors, data.labels, data.tfidf, k,
                                           derive_seed(config.seed, 0x51), options);
}

}  // namespace detail

/// Fits the full pipeline. `k` empty means one cluster per hundred
/// paragraphs.
inline FitResult fit(const Corpus& corpus, std::optional<std::size_t> k, const RunConfig& config,
                     std::string trained_at = {}) {
  config.validate();
  const auto data = prepare(corpus);
  const std::size_t k_init = k.value_or(default_k(corpus.paragraphs.size()));
  if (k_init == 0 || k_init > corpus.paragraphs.size()) {
    throw UsageError("k must lie in [1, number of paragraphs]");
  }

  FitResult result;
  result.group = detail::make_group(data, k_init, config);
  auto trained = detail::train_group(data, result.group, config, true);
  result.report = detail::report_of(trained);

  auto& m = result.model;
  m.stopword_fingerprint = textprep::stopword_fingerprint();
  m.kind = config.classifier;
  m.tfidf = data.tfidf;
  m.centroids = result.group.centroids;
  m.per_cluster.reserve(trained.size());
  for (auto& t : trained) m.per_cluster.push_back(std::move(t.model));
  m.manifest = {corpus.name, config.seed, corpus.paragraphs.size(),
                k ? std::to_string(*k) : std::string("auto"), std::move(trained_at)};
  return result;
}

struct ParagraphPrediction {
  SecurityLabel label = SecurityLabel::Unclassified;
  std::size_t cluster = 0;

  bool operator==(const ParagraphPrediction&) const = default;
};

/// Routes the paragraph to its nearest similarity cluster and applies that
/// cluster's classifier to its term frequencies. Text with no known term
/// routes as the zero vector.
inline ParagraphPrediction classify_paragraph(const AcessModel& model, std::string_view text) {
  const auto tokens = preprocess(text);
  const auto tf = term_frequency(tokens, model.tfidf.vocabulary);
  const auto masked = apply_mask(transform_tfidf(tf, model.tfidf), model.centroids.feature_mask());
  ParagraphPrediction out;
  out.cluster = nearest_cluster(masked, model.centroids);
  out.label = model.per_cluster.at(out.cluster).predict_tf(tf);
  return out;
}

struct DocumentPrediction {
  SecurityLabel label = SecurityLabel::Unclassified;
  std::vector<ParagraphPrediction> paragraphs;
};

inline DocumentPrediction classify_document(const AcessModel& model,
                                            std::span<const std::string> paragraphs) {
  if (paragraphs.empty()) throw UsageError("classify_document: no paragraphs");
  DocumentPrediction out;
  std::vector<SecurityLabel> labels;
  for (const auto& p : paragraphs) {
    out.paragraphs.push_back(classify_paragraph(model, p));
    labels.push_back(out.paragraphs.back().label);
  }
  out.label = document_label(labels);
  return out;
}

/// One classifier over the whole corpus in one globally ranked feature
/// space.
struct BaselineModel {
  ClassifierKind kind = ClassifierKind::Svm;
  Vocabulary vocabulary;
  ClusterModel model;
};

struct BaselineResult {
  BaselineModel model;
  GroupReport report;
  CvResult cv;
};

inline BaselineResult fit_baseline(const Corpus& corpus, ClassifierKind kind, RunConfig config) {
  config.classifier = kind;
  config.validate();
  const auto data = prepare(corpus);
  auto trained = train_cluster(data.tf, data.labels, data.tfidf.vocabulary.size(), config,
                               cluster_seed(config.seed, 0));
  BaselineResult out;
  out.model.kind = kind;
  out.model.vocabulary = data.tfidf.vocabulary;
  out.model.model = std::move(trained.model);
  out.cv = trained.cv;
  const std::array<ConfusionCounts, 1> one = {trained.cv.counts};
  out.report = aggregate_group(one);
  return out;
}

inline SecurityLabel classify_paragraph(const BaselineModel& model, std::string_view text) {
  return model.model.predict_tf(term_frequency(preprocess(text), model.vocabulary));
}

struct SweepEntry {
  std::size_t requested_k = 0;
  std::size_t achieved_k = 0;
  double p_used = 0.0;
  GroupReport report;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t optimum = 0;  // index into entries
  std::size_t n_paragraphs = 0;

  const SweepEntry& best() const { return entries.at(optimum); }
  /// Optimal cluster count as a fraction of the corpus size.
  double optimum_fraction() const {
    return static_cast<double>(best().achieved_k) / static_cast<double>(n_paragraphs);
  }
};

/// Evaluates the constrained cluster group for every k in [k_min, k_max]
/// and picks the group with the highest micro-aggregated mean F1.
inline SweepResult sweep_k(const Corpus& corpus, std::size_t k_min, std::size_t k_max,
                           const RunConfig& config) {
  config.validate();
  if (k_min == 0 || k_min > k_max || k_max > corpus.paragraphs.size()) {
    throw UsageError("k range must satisfy 1 <= k-min <= k-max <= number of paragraphs");
  }
  const auto data = prepare(corpus);
  SweepResult out;
  out.n_paragraphs = corpus.paragraphs.size();
  out.entries.resize(k_max - k_min + 1);
  auto inner = config;
  inner.threads = 1;
  parallel_for(out.entries.size(), config.threads, [&](std::size_t i) {
    auto& e = out.entries[i];
    e.requested_k = k_min + i;
    const auto group = detail::make_group(data, e.requested_k, inner);
    e.achieved_k = group.k;
    e.p_used = group.p_used;
    e.report = detail::report_of(detail::train_group(data, group, inner, false));
  });
  std::vector<GroupReport> reports;
  for (const auto& e : out.entries) reports.push_back(e.report);
  const auto& best = select_optimal_group(reports);
  out.optimum = static_cast<std::size_t>(&best - reports.data());
  return out;
}

/// Stratified train/test split: round(fraction * class size) of each class
/// goes to the test side.
inline std::vector<bool> holdout_split(std::span<const SecurityLabel> labels, double fraction,
                                       Seed seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("holdout fraction must lie in (0, 1)");
  std::vector<bool> is_test(labels.size(), false);
  Rng rng(seed);
  for (auto label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_test = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < n_test; ++j) is_test[members[j]] = true;
  }
  return is_test;
}

/// Held-out validation: fit on the training side, route and classify the
/// test side, and count results per routed cluster.
inline GroupReport evaluate_holdout(const Corpus& corpus, std::optional<std::size_t> k,
                                    double fraction, const RunConfig& config) {
  const auto is_test = holdout_split(corpus.labels(), fraction, derive_seed(config.seed, 0x401));
  Corpus train{corpus.name, {}};
  std::vector<const ParagraphRecord*> test;
  for (std::size_t i = 0; i < corpus.paragraphs.size(); ++i) {
    if (is_test[i]) {
      test.push_back(&corpus.paragraphs[i]);
    } else {
      train.paragraphs.push_back(corpus.paragraphs[i]);
    }
  }
  const auto fitted = fit(train, k, config);
  std::vector<ConfusionCounts> per_cluster(fitted.model.k());
  for (const auto* rec : test) {
    const auto p = classify_paragraph(fitted.model, rec->text);
    per_cluster[p.cluster].add(rec->label, p.label);
  }
  return aggregate_group(per_cluster);
}

}  // namespace acess
