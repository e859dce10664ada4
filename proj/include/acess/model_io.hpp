#pragma once

// Model file format.
//
// A model file is one canonical JSON document followed by a newline:
//
//   {"checksum":"crc32:xxxxxxxx","format":"acess-model","format_version":1,"model":{...}}
//
// Object keys are sorted and numbers are written in their shortest
// round-trip decimal form, so equal models produce byte-identical files.
// The checksum is the CRC-32 of the compact serialization of "model".

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>
#include <zlib.h>

#include "acess/acess.hpp"
#include "acess/error.hpp"

namespace acess {

namespace model_io {

using nlohmann::json;

inline std::string crc32_hex(const std::string& bytes) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
                         static_cast<uInt>(bytes.size()));
  std::ostringstream os;
  os << "crc32:" << std::hex << std::setw(8) << std::setfill('0') << crc;
  return os.str();
}

inline json labels_to_json(const std::vector<SecurityLabel>& labels) {
  json out = json::array();
  for (auto l : labels) out.push_back(canonical_name(l));
  return out;
}

inline std::vector<SecurityLabel> labels_from_json(const json& j) {
  std::vector<SecurityLabel> out;
  for (const auto& v : j) out.push_back(normalize_label(v.get<std::string>()));
  return out;
}

inline json classifier_to_json(const Classifier& c) {
  if (const auto* svm = std::get_if<OneVsOneSvm>(&c)) {
    json machines = json::array();
    for (const auto& m : svm->pairwise) {
      machines.push_back({{"weights", m.weights},
                          {"bias", m.bias},
                          {"c", m.c_param},
                          {"positive", canonical_name(m.positive_class)},
                          {"negative", canonical_name(m.negative_class)}});
    }
    return {{"type", "ovo_svm"},
            {"classes", labels_to_json(svm->classes_present)},
            {"machines", machines}};
  }
  const auto& nb = std::get<MultinomialNb>(c);
  json classes = json::array();
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    if (!std::isfinite(nb.log_priors[k])) continue;
    classes.push_back({{"label", canonical_name(label_from_index(k))},
                       {"log_prior", nb.log_priors[k]},
                       {"log_likelihoods", nb.log_likelihoods[k]}});
  }
  return {{"type", "multinomial_nb"}, {"alpha", nb.alpha}, {"classes", classes}};
}

inline Classifier classifier_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "ovo_svm") {
    OneVsOneSvm svm;
    svm.classes_present = labels_from_json(j.at("classes"));
    for (const auto& m : j.at("machines")) {
      LinearSvmBinary b;
      b.weights = m.at("weights").get<std::vector<double>>();
      b.bias = m.at("bias").get<double>();
      b.c_param = m.at("c").get<double>();
      b.positive_class = normalize_label(m.at("positive").get<std::string>());
      b.negative_class = normalize_label(m.at("negative").get<std::string>());
      svm.pairwise.push_back(std::move(b));
    }
    return svm;
  }
  if (type == "multinomial_nb") {
    MultinomialNb nb;
    nb.alpha = j.at("alpha").get<double>();
    nb.log_priors.fill(-std::numeric_limits<double>::infinity());
    for (const auto& c : j.at("classes")) {
      const auto k = index_of(normalize_label(c.at("label").get<std::string>()));
      nb.log_priors[k] = c.at("log_prior").get<double>();
      nb.log_likelihoods[k] = c.at("log_likelihoods").get<std::vector<double>>();
    }
    return nb;
  }
  throw ParseError("unknown classifier type \"" + type + "\"");
}

inline json cluster_to_json(const ClusterModel& m) {
  return {{"feature_ids", m.feature_map.kept_ids},
          {"feature_fraction", m.feature_map.fraction},
          {"hyperparameters",
           {{"feature_fraction", m.hyperparameters.feature_fraction},
            {"c", m.hyperparameters.c_param},
            {"alpha", m.hyperparameters.alpha}}},
          {"classifier", classifier_to_json(m.classifier)}};
}

inline ClusterModel cluster_from_json(const json& j) {
  ClusterModel m;
  m.feature_map.kept_ids = j.at("feature_ids").get<std::vector<FeatureId>>();
  m.feature_map.fraction = j.at("feature_fraction").get<double>();
  const auto& hp = j.at("hyperparameters");
  m.hyperparameters.feature_fraction = hp.at("feature_fraction").get<double>();
  m.hyperparameters.c_param = hp.at("c").get<double>();
  m.hyperparameters.alpha = hp.at("alpha").get<double>();
  m.classifier = classifier_from_json(j.at("classifier"));
  return m;
}

inline json model_to_json(const AcessModel& m) {
  json clusters = json::array();
  for (const auto& c : m.per_cluster) clusters.push_back(cluster_to_json(c));
  return {
      {"stopword_fingerprint", m.stopword_fingerprint},
      {"classifier_kind", to_string(m.kind)},
      {"k", m.k()},
      {"vocabulary", m.tfidf.vocabulary.terms()},
      {"idf", m.tfidf.idf},
      {"n_paragraphs_fit", m.tfidf.n_paragraphs_fit},
      {"similarity_mask",
       {{"kept_ids", m.centroids.feature_mask().kept_ids},
        {"fraction_p", m.centroids.feature_mask().fraction_p}}},
      {"centroids", m.centroids.centroids()},
      {"clusters", clusters},
      {"manifest",
       {{"corpus_name", m.manifest.corpus_name},
        {"seed", m.manifest.seed},
        {"n_paragraphs", m.manifest.n_paragraphs},
        {"requested_k", m.manifest.requested_k},
        {"trained_at", m.manifest.trained_at}}},
  };
}

inline AcessModel model_from_json(const json& j) {
  AcessModel m;
  m.stopword_fingerprint = j.at("stopword_fingerprint").get<std::string>();
  m.kind = parse_classifier_kind(j.at("classifier_kind").get<std::string>());
  m.tfidf.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
  m.tfidf.idf = j.at("idf").get<std::vector<double>>();
  m.tfidf.n_paragraphs_fit = j.at("n_paragraphs_fit").get<std::size_t>();
  SimilarityFeatureMask mask;
  mask.kept_ids = j.at("similarity_mask").at("kept_ids").get<std::vector<FeatureId>>();
  mask.fraction_p = j.at("similarity_mask").at("fraction_p").get<double>();
  m.centroids = CentroidSet(j.at("centroids").get<std::vector<std::vector<double>>>(), mask);
  for (const auto& c : j.at("clusters")) m.per_cluster.push_back(cluster_from_json(c));
  const auto& man = j.at("manifest");
  m.manifest.corpus_name = man.at("corpus_name").get<std::string>();
  m.manifest.seed = man.at("seed").get<Seed>();
  m.manifest.n_paragraphs = man.at("n_paragraphs").get<std::size_t>();
  m.manifest.requested_k = man.at("requested_k").get<std::string>();
  m.manifest.trained_at = man.at("trained_at").get<std::string>();

  const std::size_t v = m.tfidf.vocabulary.size();
  if (m.tfidf.idf.size() != v) throw ParseError("model: idf length does not match vocabulary");
  if (j.at("k").get<std::size_t>() != m.per_cluster.size() ||
      m.centroids.k() != m.per_cluster.size() || m.per_cluster.empty()) {
    throw ParseError("model: cluster count mismatch");
  }
  for (auto id : mask.kept_ids) {
    if (id >= v) throw ParseError("model: similarity feature id out of range");
  }
  for (const auto& c : m.per_cluster) {
    for (auto id : c.feature_map.kept_ids) {
      if (id >= v) throw ParseError("model: cluster feature id out of range");
    }
  }
  return m;
}

}  // namespace model_io

/// Canonical file contents for a model.
inline std::string serialize_model(const AcessModel& model) {
  const auto body = model_io::model_to_json(model);
  nlohmann::json container = {{"format", "acess-model"},
                              {"format_version", model.format_version},
                              {"checksum", model_io::crc32_hex(body.dump())},
                              {"model", body}};
  return container.dump() + "\n";
}

inline AcessModel deserialize_model(const std::string& bytes) {
  nlohmann::json container;
  try {
    container = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is truncated or malformed: ") + e.what());
  }
  try {
    if (!container.is_object() || container.value("format", "") != "acess-model") {
      throw ParseError("not an acess model file");
    }
    const int version = container.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("unsupported model format version " + std::to_string(version) +
                       " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }
    const auto& body = container.at("model");
    if (model_io::crc32_hex(body.dump()) != container.at("checksum").get<std::string>()) {
      throw ParseError("model checksum mismatch: file is corrupted");
    }
    auto model = model_io::model_from_json(body);
    model.format_version = version;
    if (model.stopword_fingerprint != textprep::stopword_fingerprint()) {
      throw ParseError("model was trained with a different stopword list");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is missing or mistypes a field: ") + e.what());
  }
}

inline void save_model(const AcessModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file \"" + path + "\"");
  out << bytes;
  if (!out) throw IoError("failed writing model file \"" + path + "\"");
}

inline AcessModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace acess
