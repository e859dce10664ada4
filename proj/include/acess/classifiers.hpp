#pragma once

// Uniform front for the two classifier families used per cluster and by
// the monolithic baselines.

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "acess/error.hpp"
#include "acess/naive_bayes.hpp"
#include "acess/svm.hpp"

namespace acess {

enum class ClassifierKind { Svm, NaiveBayes };

inline std::string_view to_string(ClassifierKind kind) {
  return kind == ClassifierKind::Svm ? "svm" : "nb";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "svm") return ClassifierKind::Svm;
  if (s == "nb") return ClassifierKind::NaiveBayes;
  throw UsageError("unknown classifier kind \"" + std::string(s) + "\" (expected svm or nb)");
}

/// One grid point: security-feature fraction plus the classifier's
/// regularization knob (C for the SVM, alpha for Naive Bayes).
struct Hyperparameters {
  double feature_fraction = 1.0;
  double c_param = 1.0;
  double alpha = 1.0;

  bool operator==(const Hyperparameters&) const = default;
};

using Classifier = std::variant<OneVsOneSvm, MultinomialNb>;

struct ClassifierTraining {
  ClassifierKind kind = ClassifierKind::Svm;
  double svm_tol = 1e-4;
  std::size_t svm_max_epochs = 1000;
};

inline Classifier train_classifier(std::span<const SparseVector> vectors,
                                   std::span<const SecurityLabel> labels, std::size_t dimension,
                                   const Hyperparameters& hp, const ClassifierTraining& how,
                                   Seed seed, OvoTrainReport* report = nullptr) {
  if (how.kind == ClassifierKind::NaiveBayes) {
    return train_nb(vectors, labels, dimension, hp.alpha);
  }
  SvmTrainOptions opts;
  opts.c_param = hp.c_param;
  opts.tol = how.svm_tol;
  opts.max_epochs = how.svm_max_epochs;
  opts.seed = seed;
  return train_ovo(vectors, labels, dimension, opts, report);
}

inline SecurityLabel predict(const Classifier& model, const SparseVector& x) {
  return std::visit(
      [&](const auto& m) -> SecurityLabel {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, OneVsOneSvm>) {
          return predict_ovo(m, x);
        } else {
          return predict_nb(m, x);
        }
      },
      model);
}

}  // namespace acess
