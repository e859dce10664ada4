#pragma once

// `acess` command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 parse, 3 training infeasible, 4 I/O.
// Failures print one line on stderr:
//   error: kind=<usage|parse|training|io> code=<n> message="<json-escaped text>"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acess/acess.hpp"
#include "acess/corpus.hpp"
#include "acess/error.hpp"
#include "acess/model_io.hpp"
#include "acess/synth.hpp"

namespace acess::cli {

struct Options {
  std::string corpus;
  std::string name;
  bool strict = false;
  RunConfig run;
  std::string classifier = "svm";
  std::string k = "auto";
  std::size_t k_min = 1;
  std::size_t k_max = 10;
  std::string feature_fractions;
  std::string c_grid;
  std::string alpha_grid;
  std::string model;
  std::string input;
  std::string out;
  std::string doc_out;
  std::string report;
  std::string format = "json";
  std::string mode = "cv";
  double holdout_fraction = 0.2;
  std::size_t topics = 5;
  std::size_t per_topic = 400;
  double noise = 0.05;
  std::string timestamp;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto trimmed = acess::detail::trim(item);
    if (trimmed.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(std::string(trimmed), &used));
      if (used != trimmed.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid number in --") + what + ": \"" + std::string(trimmed) +
                       "\"");
    }
  }
  if (out.empty()) throw UsageError(std::string("--") + what + " is empty");
  return out;
}

inline std::optional<std::size_t> parse_k(const std::string& k) {
  if (k == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(k, &used);
    if (used != k.size() || v == 0) throw std::invalid_argument("k");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError("--k must be \"auto\" or a positive integer");
  }
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag --") + flag);
}

class OutputFile {
 public:
  /// Empty path writes to `fallback`.
  OutputFile(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty()) {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write \"" + path + "\"");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing \"" + (path_.empty() ? "stdout" : path_) + "\"");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

inline Corpus load_corpus(const Options& o, bool label_optional = false) {
  require(o.corpus, "corpus");
  ParseOptions po;
  po.strict = o.strict;
  po.label_optional = label_optional;
  const auto name = o.name.empty() ? std::filesystem::path(o.corpus).stem().string() : o.name;
  return parse_corpus_file(o.corpus, name, po);
}

inline nlohmann::json metrics_json(const GroupReport& r) {
  nlohmann::json per_class;
  for (auto l : kAllLabels) {
    const auto c = index_of(l);
    per_class[std::string(display_name(l))] = {{"precision", r.aggregate_metrics.precision[c]},
                                               {"recall", r.aggregate_metrics.recall[c]},
                                               {"f1", r.aggregate_metrics.f1[c]}};
  }
  return {{"k", r.k}, {"mean_f1", r.mean_f1}, {"classes", per_class}};
}

inline void write_report(const std::string& path, const std::string& dataset,
                         std::span<const GroupReport> reports) {
  if (path.empty()) return;
  OutputFile f(path, std::cout);
  write_report_header(f.get());
  for (const auto& r : reports) write_report_rows(f.get(), dataset, r);
  f.close();
}

}  // namespace detail

inline int cmd_validate(const Options& o, std::ostream& out) {
  const auto corpus = detail::load_corpus(o);
  const auto stats = dataset_stats(corpus);
  out << nlohmann::json{{"dataset", corpus.name},
                        {"valid", true},
                        {"paragraphs", stats.n_paragraphs},
                        {"documents", stats.n_documents},
                        {"distinct_labels", corpus.distinct_label_count()}}
             .dump()
      << '\n';
  return 0;
}

inline int cmd_stats(const Options& o, std::ostream& out) {
  const auto corpus = detail::load_corpus(o);
  const auto stats = dataset_stats(corpus);
  detail::OutputFile f(o.out, out);
  if (o.format == "csv") {
    write_stats_csv(stats, f.get());
  } else if (o.format == "json") {
    f.get() << stats_to_json(stats, corpus.name).dump() << '\n';
  } else {
    throw UsageError("--format must be json or csv");
  }
  f.close();
  return 0;
}

inline int cmd_synth(const Options& o, std::ostream& out) {
  SynthOptions so;
  so.topics = o.topics;
  so.paragraphs_per_topic = o.per_topic;
  so.signal_noise = o.noise;
  so.seed = o.run.seed;
  if (so.topics == 0 || so.paragraphs_per_topic == 0) {
    throw UsageError("--topics and --per-topic must be positive");
  }
  const auto corpus = generate_synthetic_corpus(so, o.name.empty() ? "synthetic" : o.name);
  detail::OutputFile f(o.out, out);
  serialize_corpus(corpus, f.get());
  f.close();
  return 0;
}

inline int cmd_train(const Options& o, std::ostream& out) {
  detail::require(o.model, "model");
  const auto corpus = detail::load_corpus(o);
  const auto k = detail::parse_k(o.k);
  const auto result = fit(corpus, k, o.run, o.timestamp);
  save_model(result.model, o.model);
  const std::array<GroupReport, 1> reports = {result.report};
  detail::write_report(o.report, corpus.name, reports);
  auto summary = detail::metrics_json(result.report);
  summary["p_used"] = result.group.p_used;
  summary["requested_k"] = k ? nlohmann::json(*k) : nlohmann::json("auto");
  summary["model"] = o.model;
  out << summary.dump() << '\n';
  return 0;
}

inline int cmd_baseline(const Options& o, std::ostream& out) {
  const auto corpus = detail::load_corpus(o);
  const auto result = fit_baseline(corpus, o.run.classifier, o.run);
  const std::array<GroupReport, 1> reports = {result.report};
  detail::write_report(o.report, corpus.name, reports);
  auto summary = detail::metrics_json(result.report);
  summary["classifier"] = to_string(o.run.classifier);
  summary["feature_fraction"] = result.cv.best.feature_fraction;
  summary["features_kept"] = result.model.model.feature_map.size();
  if (o.run.classifier == ClassifierKind::Svm) {
    summary["c"] = result.cv.best.c_param;
  } else {
    summary["alpha"] = result.cv.best.alpha;
  }
  out << summary.dump() << '\n';
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
  const auto corpus = detail::load_corpus(o);
  const auto result = sweep_k(corpus, o.k_min, o.k_max, o.run);
  std::vector<GroupReport> reports;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : result.entries) {
    reports.push_back(e.report);
    entries.push_back({{"requested_k", e.requested_k},
                       {"achieved_k", e.achieved_k},
                       {"p_used", e.p_used},
                       {"mean_f1", e.report.mean_f1}});
  }
  detail::write_report(o.report, corpus.name, reports);
  const auto& best = result.best();
  out << nlohmann::json{{"dataset", corpus.name},
                        {"paragraphs", result.n_paragraphs},
                        {"entries", entries},
                        {"optimum",
                         {{"requested_k", best.requested_k},
                          {"achieved_k", best.achieved_k},
                          {"mean_f1", best.report.mean_f1},
                          {"fraction_of_paragraphs", result.optimum_fraction()}}}}
             .dump()
      << '\n';
  return 0;
}

inline int cmd_eval(const Options& o, std::ostream& out) {
  const auto corpus = detail::load_corpus(o);
  const auto k = detail::parse_k(o.k);
  GroupReport report;
  if (o.mode == "cv") {
    report = fit(corpus, k, o.run).report;
  } else if (o.mode == "holdout") {
    report = evaluate_holdout(corpus, k, o.holdout_fraction, o.run);
  } else {
    throw UsageError("--mode must be cv or holdout");
  }
  const std::array<GroupReport, 1> reports = {report};
  detail::write_report(o.report, corpus.name, reports);
  auto summary = detail::metrics_json(report);
  summary["mode"] = o.mode;
  out << summary.dump() << '\n';
  return 0;
}

inline int cmd_predict(const Options& o, std::ostream& out) {
  detail::require(o.model, "model");
  detail::require(o.input, "in");
  const auto model = load_model(o.model);
  ParseOptions po;
  po.strict = o.strict;
  po.label_optional = true;
  const auto queries = parse_corpus_file(o.input, "queries", po);

  detail::OutputFile f(o.out, out);
  std::map<std::string, std::vector<SecurityLabel>> per_doc;
  std::vector<std::string> doc_order;
  for (const auto& rec : queries.paragraphs) {
    const auto p = classify_paragraph(model, rec.text);
    f.get() << nlohmann::json{{"doc_id", rec.doc_id},
                              {"ordinal", rec.ordinal},
                              {"predicted_label", canonical_name(p.label)},
                              {"cluster", p.cluster}}
                   .dump()
            << '\n';
    auto [it, inserted] = per_doc.try_emplace(rec.doc_id);
    if (inserted) doc_order.push_back(rec.doc_id);
    it->second.push_back(p.label);
  }
  f.close();

  if (!o.doc_out.empty()) {
    detail::OutputFile d(o.doc_out, out);
    for (const auto& doc : doc_order) {
      d.get() << nlohmann::json{{"doc_id", doc},
                                {"predicted_label", canonical_name(document_label(per_doc[doc]))},
                                {"paragraphs", per_doc[doc].size()}}
                     .dump()
              << '\n';
    }
    d.close();
  }
  return 0;
}

inline void print_error(std::ostream& err, ErrorKind kind, const std::string& message) {
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  err << "error: kind=" << to_string(kind) << " code=" << static_cast<int>(kind)
      << " message=" << nlohmann::json(flat).dump() << '\n';
}

/// Runs one invocation; `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Paragraph-level security classification with similarity clusters", "acess"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Key-value file setting any flag; command line wins");

  Options o;
  std::string seed_text = std::to_string(o.run.seed);
  app.add_option("--corpus", o.corpus, "Corpus JSONL file");
  app.add_option("--name", o.name, "Dataset name (default: corpus file stem)");
  app.add_flag("--strict", o.strict, "Reject unknown JSONL fields");
  app.add_option("--seed", o.run.seed, "Random seed")->capture_default_str();
  app.add_option("--folds", o.run.folds, "Cross-validation folds")->capture_default_str();
  app.add_option("--p-similarity", o.run.p_similarity, "Starting similarity feature fraction")
      ->capture_default_str();
  app.add_option("--feature-fractions", o.feature_fractions,
                 "Comma-separated security feature fractions");
  app.add_option("--c-grid", o.c_grid, "Comma-separated SVM C values");
  app.add_option("--alpha-grid", o.alpha_grid, "Comma-separated Naive Bayes alpha values");
  app.add_option("--classifier", o.classifier, "svm or nb")->capture_default_str();
  app.add_option("--k", o.k, "Cluster count or auto")->capture_default_str();
  app.add_option("--k-min", o.k_min, "Smallest k of the sweep")->capture_default_str();
  app.add_option("--k-max", o.k_max, "Largest k of the sweep")->capture_default_str();
  app.add_option("--restarts", o.run.kmeans_restarts, "k-means restarts")->capture_default_str();
  app.add_option("--svm-tol", o.run.svm_tol, "SVM stopping tolerance")->capture_default_str();
  app.add_option("--threads", o.run.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
  app.add_option("--model", o.model, "Model file (written by train, read by predict)");
  app.add_option("--in", o.input, "Paragraph JSONL to classify");
  app.add_option("--out", o.out, "Output file (default: stdout)");
  app.add_option("--doc-out", o.doc_out, "Per-document predictions JSONL");
  app.add_option("--report", o.report, "Evaluation report CSV");
  app.add_option("--format", o.format, "Stats output: json or csv")->capture_default_str();
  app.add_option("--mode", o.mode, "Evaluation mode: cv or holdout")->capture_default_str();
  app.add_option("--holdout-fraction", o.holdout_fraction, "Test share for holdout mode")
      ->capture_default_str();
  app.add_option("--topics", o.topics, "Synthetic topics")->capture_default_str();
  app.add_option("--per-topic", o.per_topic, "Synthetic paragraphs per topic")
      ->capture_default_str();
  app.add_option("--noise", o.noise, "Synthetic signal noise rate")->capture_default_str();
  app.add_option("--timestamp", o.timestamp, "Training timestamp recorded in the model");

  std::map<std::string, int (*)(const Options&, std::ostream&)> commands = {
      {"validate", cmd_validate}, {"stats", cmd_stats},     {"train", cmd_train},
      {"baseline", cmd_baseline}, {"sweep", cmd_sweep},     {"eval", cmd_eval},
      {"predict", cmd_predict},   {"synth", cmd_synth},
  };
  const std::map<std::string, std::string> help = {
      {"validate", "Parse and validate a corpus"},
      {"stats", "Document and paragraph counts per label"},
      {"train", "Fit and save a model"},
      {"baseline", "Cross-validate a monolithic SVM or Naive Bayes baseline"},
      {"sweep", "Evaluate a range of cluster counts"},
      {"eval", "Evaluate one cluster count by CV or held-out validation"},
      {"predict", "Classify paragraphs with a saved model"},
      {"synth", "Write the seeded synthetic corpus"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::FileError& e) {
    print_error(err, ErrorKind::Io, e.what());
    return static_cast<int>(ErrorKind::Io);
  } catch (const CLI::ParseError& e) {
    print_error(err, ErrorKind::Usage, e.what());
    return static_cast<int>(ErrorKind::Usage);
  }

  try {
    o.run.classifier = parse_classifier_kind(o.classifier);
    if (!o.feature_fractions.empty()) {
      o.run.feature_fraction_grid = detail::parse_list(o.feature_fractions, "feature-fractions");
    }
    if (!o.c_grid.empty()) o.run.c_grid = detail::parse_list(o.c_grid, "c-grid");
    if (!o.alpha_grid.empty()) o.run.alpha_grid = detail::parse_list(o.alpha_grid, "alpha-grid");
    o.run.validate();
    const auto* sub = app.get_subcommands().front();
    return commands.at(sub->get_name())(o, out);
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error(err, ErrorKind::Training, e.what());
    return static_cast<int>(ErrorKind::Training);
  }
}

}  // namespace acess::cli
