#include <catch_amalgamated.hpp>

#include <cmath>

#include "acess/classifiers.hpp"
#include "support/oracles.hpp"
#include "support/random_data.hpp"

using namespace acess;
using Catch::Matchers::WithinAbs;
using enum SecurityLabel;

namespace {

SparseVector row(const std::vector<double>& d) {
  SparseVector v;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] != 0.0) v.entries.push_back({static_cast<FeatureId>(i), d[i]});
  }
  return v;
}

struct Instance {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

Instance random_instance(Rng& rng, std::size_t n, std::size_t d) {
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(d);
    for (auto& v : p) v = std::round((rng.uniform() * 4 - 2) * 100) / 100;
    in.x.push_back(p);
    in.y.push_back(i < 1 ? 1 : (i < 2 ? -1 : (rng.below(2) == 0 ? 1 : -1)));
  }
  return in;
}

std::vector<SparseVector> rows(const Instance& in) {
  std::vector<SparseVector> out;
  for (const auto& p : in.x) out.push_back(row(p));
  return out;
}

LinearSvmBinary constant_machine(double value, SecurityLabel pos, SecurityLabel neg) {
  LinearSvmBinary m;
  m.bias = value;
  m.positive_class = pos;
  m.negative_class = neg;
  return m;
}

MultinomialNb toy_nb() {
  const std::vector<SparseVector> tf = {row({2, 0}), row({0, 1})};
  const std::vector<SecurityLabel> labels = {Unclassified, Confidential};
  return train_nb(tf, labels, 2, 1.0);
}

}  // namespace

TEST_CASE("svm separates symmetric 1-D data", "[classifiers]") {
  const std::vector<SparseVector> x = {row({-2}), row({-1}), row({1}), row({2})};
  const std::vector<int> y = {-1, -1, 1, 1};
  SvmTrainOptions opts;
  const auto r = train_svm_binary(x, y, 1, opts);
  CHECK(r.converged);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(r.model.decision(x[i]) * y[i] > 0);
  CHECK(r.model.decision(row({-3})) < 0);
  CHECK(r.model.decision(row({3})) > 0);
}

TEST_CASE("svm input validation", "[classifiers]") {
  const std::vector<SparseVector> x = {row({1}), row({2})};
  SvmTrainOptions opts;
  CHECK_THROWS_AS(train_svm_binary(x, std::vector<int>{1, 1}, 1, opts), TrainingError);
  opts.c_param = 0;
  CHECK_THROWS_AS(train_svm_binary(x, std::vector<int>{1, -1}, 1, opts), UsageError);
}

TEST_CASE("svm dual objective matches the exhaustive QP optimum", "[classifiers]") {
  Rng rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = random_instance(rng, 2 + rng.below(7), 1 + rng.below(3));
    SvmTrainOptions opts;
    opts.c_param = std::pow(10.0, static_cast<double>(rng.below(4)) - 2.0);
    opts.tol = 1e-9;
    opts.max_epochs = 200000;
    opts.seed = trial;
    const auto r = train_svm_binary(rows(inst), inst.y, inst.x[0].size(), opts);
    CHECK(r.converged);
    CHECK_THAT(r.dual_objective, WithinAbs(oracle::svm_dual_optimum(inst.x, inst.y, opts.c_param), 1e-6));
  }
}

TEST_CASE("svm dual objective never rises during training", "[classifiers]") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 20, 3);
    SvmTrainOptions opts;
    opts.c_param = 10;
    opts.tol = 1e-8;
    opts.trace = true;
    opts.seed = trial;
    const auto r = train_svm_binary(rows(inst), inst.y, 3, opts);
    REQUIRE_FALSE(r.objective_trace.empty());
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("duplicating the data and halving C keeps the boundary", "[classifiers]") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(rng, 12, 2);
    auto twice = inst;
    twice.x.insert(twice.x.end(), inst.x.begin(), inst.x.end());
    twice.y.insert(twice.y.end(), inst.y.begin(), inst.y.end());
    SvmTrainOptions a;
    a.c_param = 1.0;
    a.tol = 1e-11;
    a.max_epochs = 1000000;
    auto b = a;
    b.c_param = 0.5;
    const auto ra = train_svm_binary(rows(inst), inst.y, 2, a);
    const auto rb = train_svm_binary(rows(twice), twice.y, 2, b);
    CHECK_THAT(ra.model.bias, WithinAbs(rb.model.bias, 1e-6));
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK_THAT(ra.model.weights[d], WithinAbs(rb.model.weights[d], 1e-6));
    }
  }
}

TEST_CASE("one-vs-one voting", "[classifiers]") {
  SECTION("cyclic tie goes to the largest summed margin") {
    OneVsOneSvm m;
    m.classes_present = {Unclassified, Confidential, Secret};
    m.pairwise = {constant_machine(-0.1, Confidential, Unclassified),
                  constant_machine(0.3, Secret, Unclassified),
                  constant_machine(-0.9, Secret, Confidential)};
    CHECK(predict_ovo(m, SparseVector{}) == Confidential);
  }
  SECTION("full tie goes to the lower label") {
    OneVsOneSvm m;
    m.classes_present = {Unclassified, Confidential, Secret};
    m.pairwise = {constant_machine(-0.5, Confidential, Unclassified),
                  constant_machine(0.5, Secret, Unclassified),
                  constant_machine(-0.5, Secret, Confidential)};
    CHECK(predict_ovo(m, SparseVector{}) == Unclassified);
  }
  SECTION("two classes follow the sign") {
    OneVsOneSvm m;
    m.classes_present = {Confidential, Secret};
    m.pairwise = {constant_machine(0.2, Secret, Confidential)};
    CHECK(predict_ovo(m, SparseVector{}) == Secret);
    m.pairwise[0].bias = -0.2;
    CHECK(predict_ovo(m, SparseVector{}) == Confidential);
  }
  SECTION("a single class is a constant predictor") {
    const std::vector<SparseVector> x = {row({1}), row({2})};
    const std::vector<SecurityLabel> labels = {Secret, Secret};
    const auto m = train_ovo(x, labels, 1, {});
    CHECK(m.pairwise.empty());
    CHECK(predict_ovo(m, row({-5})) == Secret);
  }
}

TEST_CASE("one-vs-one ignores machine storage order", "[classifiers]") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SparseVector> x;
    for (int i = 0; i < 30; ++i) x.push_back(row({rng.uniform(), rng.uniform(), rng.uniform()}));
    const auto labels = testdata::random_labels(rng, 30);
    const auto model = train_ovo(x, labels, 3, {});
    auto permuted = model;
    std::vector<LinearSvmBinary> machines = permuted.pairwise;
    rng.shuffle(std::span<LinearSvmBinary>(machines));
    permuted.pairwise = machines;
    for (int q = 0; q < 20; ++q) {
      const auto query = row({rng.uniform() * 2, rng.uniform() * 2, rng.uniform() * 2});
      CHECK(predict_ovo(model, query) == predict_ovo(permuted, query));
    }
  }
}

TEST_CASE("naive bayes hand-computed toy", "[classifiers]") {
  const auto nb = toy_nb();
  const auto u = index_of(Unclassified);
  const auto c = index_of(Confidential);
  CHECK_THAT(std::exp(nb.log_likelihoods[u][0]), WithinAbs(0.75, 1e-15));
  CHECK_THAT(std::exp(nb.log_likelihoods[u][1]), WithinAbs(0.25, 1e-15));
  CHECK_THAT(std::exp(nb.log_likelihoods[c][0]), WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(std::exp(nb.log_likelihoods[c][1]), WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_FALSE(nb.has_class(Secret));

  const auto a = nb_log_scores(nb, row({1, 0}));
  CHECK_THAT(a[u], WithinAbs(-0.9808292530117262, 1e-12));
  CHECK_THAT(a[c], WithinAbs(-1.791759469228055, 1e-12));
  CHECK(predict_nb(nb, row({1, 0})) == Unclassified);

  const auto bbb = nb_log_scores(nb, row({0, 3}));
  CHECK_THAT(bbb[u], WithinAbs(-4.852030263919617, 1e-12));
  CHECK_THAT(bbb[c], WithinAbs(-1.9095425048844388, 1e-12));
  CHECK(predict_nb(nb, row({0, 3})) == Confidential);

  CHECK(predict_nb(nb, SparseVector{}) == Unclassified);
}

TEST_CASE("naive bayes distributions and limits", "[classifiers]") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SparseVector> x;
    const std::size_t dim = 1 + rng.below(10);
    for (int i = 0; i < 15; ++i) {
      std::vector<double> d(dim);
      for (auto& v : d) v = static_cast<double>(rng.below(4));
      x.push_back(row(d));
    }
    const auto labels = testdata::random_labels(rng, 15);
    const auto nb = train_nb(x, labels, dim, 0.1 + rng.uniform());
    double prior_sum = 0.0;
    for (auto l : kAllLabels) {
      if (!nb.has_class(l)) continue;
      prior_sum += std::exp(nb.log_priors[index_of(l)]);
      double s = 0.0;
      for (double ll : nb.log_likelihoods[index_of(l)]) s += std::exp(ll);
      CHECK_THAT(s, WithinAbs(1.0, 1e-12));
    }
    CHECK_THAT(prior_sum, WithinAbs(1.0, 1e-12));
  }

  const std::vector<SparseVector> sym = {row({3, 0}), row({0, 3})};
  const auto flat = train_nb(sym, std::vector<SecurityLabel>{Unclassified, Secret}, 2, 1e9);
  CHECK_THAT(std::exp(flat.log_likelihoods[0][0]), WithinAbs(0.5, 1e-8));

  const auto single = train_nb(sym, std::vector<SecurityLabel>{Secret, Secret}, 2, 1.0);
  CHECK(single.log_priors[index_of(Secret)] == 0.0);
  CHECK(predict_nb(single, row({5, 0})) == Secret);
  CHECK_THROWS_AS(train_nb(std::vector<SparseVector>{}, std::vector<SecurityLabel>{}, 2, 1.0),
                  TrainingError);
}

TEST_CASE("naive bayes argmax survives integer scaling under uniform priors", "[classifiers]") {
  Rng rng(90);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 2 + rng.below(8);
    std::vector<SparseVector> x;
    std::vector<SecurityLabel> labels;
    for (int i = 0; i < 12; ++i) {
      std::vector<double> d(dim);
      for (auto& v : d) v = static_cast<double>(rng.below(4));
      x.push_back(row(d));
      labels.push_back(label_from_index(static_cast<std::size_t>(i) % 3));
    }
    const auto nb = train_nb(x, labels, dim, 1.0);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> d(dim);
      for (auto& v : d) v = static_cast<double>(rng.below(3));
      const auto base = predict_nb(nb, row(d));
      for (double m : {2.0, 3.0, 7.0}) {
        auto scaled = d;
        for (auto& v : scaled) v *= m;
        CHECK(predict_nb(nb, row(scaled)) == base);
      }
    }
  }
}

TEST_CASE("classifier facade dispatches by kind", "[classifiers]") {
  CHECK(parse_classifier_kind("svm") == ClassifierKind::Svm);
  CHECK(parse_classifier_kind("nb") == ClassifierKind::NaiveBayes);
  CHECK_THROWS(parse_classifier_kind("tree"));

  const std::vector<SparseVector> x = {row({2, 0}), row({0, 1})};
  const std::vector<SecurityLabel> labels = {Unclassified, Confidential};
  const Hyperparameters hp{1.0, 1.0, 1.0};
  const auto nb = train_classifier(x, labels, 2, hp, {ClassifierKind::NaiveBayes}, 0);
  CHECK(std::holds_alternative<MultinomialNb>(nb));
  CHECK(predict(nb, row({0, 3})) == Confidential);
  const auto svm = train_classifier(x, labels, 2, hp, {ClassifierKind::Svm}, 0);
  CHECK(std::holds_alternative<OneVsOneSvm>(svm));
  CHECK(predict(svm, row({2, 0})) == Unclassified);
  CHECK(predict(svm, row({0, 1})) == Confidential);
}
