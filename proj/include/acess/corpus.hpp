#pragma once

// Paragraph corpus data model, JSONL ingestion, label normalization and
// dataset statistics.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acess/error.hpp"

namespace acess {

enum class SecurityLabel : std::uint8_t {
  Unclassified = 0,
  Confidential = 1,
  Secret = 2,
};

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<SecurityLabel, kNumLabels> kAllLabels = {
    SecurityLabel::Unclassified, SecurityLabel::Confidential, SecurityLabel::Secret};

constexpr std::size_t index_of(SecurityLabel label) { return static_cast<std::size_t>(label); }

constexpr SecurityLabel label_from_index(std::size_t i) { return static_cast<SecurityLabel>(i); }

/// Canonical upper-case name, as written to corpus and prediction files.
inline std::string_view canonical_name(SecurityLabel label) {
  switch (label) {
    case SecurityLabel::Unclassified: return "UNCLASSIFIED";
    case SecurityLabel::Confidential: return "CONFIDENTIAL";
    case SecurityLabel::Secret: return "SECRET";
  }
  return "UNCLASSIFIED";
}

/// Title-case name used in reports.
inline std::string_view display_name(SecurityLabel label) {
  switch (label) {
    case SecurityLabel::Unclassified: return "Unclassified";
    case SecurityLabel::Confidential: return "Confidential";
    case SecurityLabel::Secret: return "Secret";
  }
  return "Unclassified";
}

inline std::ostream& operator<<(std::ostream& os, SecurityLabel label) {
  return os << display_name(label);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Maps a raw classification marking onto the three-level taxonomy.
/// Only the segment before the first '/' is considered, so dissemination
/// caveats such as "C/NOFORN" or "SECRET//NOFORN" collapse onto their level.
inline SecurityLabel normalize_label(std::string_view raw) {
  const auto head = detail::trim(raw.substr(0, raw.find('/')));
  const auto key = detail::upper(head);
  if (key == "UNCLASSIFIED" || key == "U") return SecurityLabel::Unclassified;
  if (key == "CONFIDENTIAL" || key == "C") return SecurityLabel::Confidential;
  if (key == "SECRET" || key == "S") return SecurityLabel::Secret;
  throw ParseError("unknown security label \"" + std::string(raw) + "\"");
}

/// A document carries the highest label of any of its paragraphs.
inline SecurityLabel document_label(std::span<const SecurityLabel> paragraph_labels) {
  if (paragraph_labels.empty()) throw ParseError("document_label: no paragraph labels");
  return *std::max_element(paragraph_labels.begin(), paragraph_labels.end());
}

struct ParagraphUid {
  std::string sender;
  std::string receiver;
  std::string timestamp;  // RFC 3339

  bool operator==(const ParagraphUid&) const = default;
};

struct ParagraphRecord {
  std::string doc_id;
  std::uint64_t ordinal = 0;
  ParagraphUid uid;
  std::string text;
  SecurityLabel label = SecurityLabel::Unclassified;

  bool operator==(const ParagraphRecord&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<ParagraphRecord> paragraphs;

  bool operator==(const Corpus&) const = default;

  std::vector<SecurityLabel> labels() const {
    std::vector<SecurityLabel> out;
    out.reserve(paragraphs.size());
    for (const auto& p : paragraphs) out.push_back(p.label);
    return out;
  }

  std::size_t distinct_label_count() const {
    std::array<bool, kNumLabels> seen{};
    for (const auto& p : paragraphs) seen[index_of(p.label)] = true;
    return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  }
};

/// Training needs at least one paragraph and two distinct labels.
inline void require_trainable(const Corpus& corpus) {
  if (corpus.paragraphs.empty()) throw TrainingError("corpus \"" + corpus.name + "\" is empty");
  if (corpus.distinct_label_count() < 2) {
    throw TrainingError("corpus \"" + corpus.name +
                        "\" has fewer than two distinct security labels");
  }
}

struct ParseOptions {
  /// Reject unknown fields instead of warning about them.
  bool strict = false;
  /// Records may omit "label" (prediction inputs). Missing labels read as
  /// Unclassified.
  bool label_optional = false;
  /// Destination for non-fatal warnings; nullptr silences them.
  std::ostream* warnings = &std::cerr;
};

namespace detail {

inline bool is_rfc3339(const std::string& s) {
  static const std::regex re(
      R"(^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$)");
  return std::regex_match(s, re);
}

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  bool non_empty = true) {
  const auto& v = require_field(obj, key);
  if (!v.is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string");
  auto s = v.get<std::string>();
  if (non_empty && trim(s).empty()) {
    throw ParseError(std::string("field \"") + key + "\" must be non-empty");
  }
  return s;
}

inline void check_unknown(const nlohmann::json& obj, std::span<const std::string_view> allowed,
                          const std::string& where, const ParseOptions& options,
                          std::set<std::string>& warned) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    if (options.strict) throw ParseError("unknown field \"" + where + key + "\"");
    if (options.warnings != nullptr && warned.insert(where + key).second) {
      *options.warnings << "warning: ignoring unknown field \"" << where << key << "\"\n";
    }
  }
}

}  // namespace detail

/// Parses a JSONL corpus from a stream. Errors name the 1-based line.
inline Corpus parse_corpus(std::istream& in, std::string name, const ParseOptions& options = {}) {
  static constexpr std::array<std::string_view, 5> kTopFields = {"doc_id", "ordinal", "uid", "text",
                                                                 "label"};
  static constexpr std::array<std::string_view, 3> kUidFields = {"sender", "receiver",
                                                                 "timestamp"};
  Corpus corpus{std::move(name), {}};
  std::set<std::pair<std::string, std::uint64_t>> keys;
  std::unordered_map<std::string, std::uint64_t> position_in_doc;
  std::set<std::string> warned;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    try {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
      }
      if (!obj.is_object()) throw ParseError("record is not a JSON object");
      detail::check_unknown(obj, kTopFields, "", options, warned);

      ParagraphRecord rec;
      rec.doc_id = detail::require_string(obj, "doc_id");

      const auto& uid = detail::require_field(obj, "uid");
      if (!uid.is_object()) throw ParseError("field \"uid\" must be an object");
      detail::check_unknown(uid, kUidFields, "uid.", options, warned);
      rec.uid.sender = detail::require_string(uid, "sender");
      rec.uid.receiver = detail::require_string(uid, "receiver");
      rec.uid.timestamp = detail::require_string(uid, "timestamp");
      if (!detail::is_rfc3339(rec.uid.timestamp)) {
        throw ParseError("uid.timestamp \"" + rec.uid.timestamp + "\" is not RFC 3339");
      }

      rec.text = detail::require_string(obj, "text", false);
      if (detail::trim(rec.text).empty()) throw ParseError("empty paragraph text");

      if (options.label_optional && !obj.contains("label")) {
        rec.label = SecurityLabel::Unclassified;
      } else {
        rec.label = normalize_label(detail::require_string(obj, "label"));
      }

      auto& position = position_in_doc[rec.doc_id];
      if (auto it = obj.find("ordinal"); it != obj.end()) {
        if (!it->is_number_unsigned()) {
          throw ParseError("field \"ordinal\" must be a non-negative integer");
        }
        rec.ordinal = it->get<std::uint64_t>();
      } else {
        rec.ordinal = position;
      }
      ++position;

      if (!keys.emplace(rec.doc_id, rec.ordinal).second) {
        throw ParseError("duplicate paragraph (doc_id \"" + rec.doc_id + "\", ordinal " +
                         std::to_string(rec.ordinal) + ")");
      }
      corpus.paragraphs.push_back(std::move(rec));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (corpus.paragraphs.empty()) throw ParseError("empty corpus");
  return corpus;
}

inline Corpus parse_corpus_file(const std::string& path, std::string name,
                                const ParseOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file \"" + path + "\"");
  try {
    return parse_corpus(in, std::move(name), options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const ParagraphRecord& rec) {
  nlohmann::json obj;
  obj["doc_id"] = rec.doc_id;
  obj["ordinal"] = rec.ordinal;
  obj["uid"] = {{"sender", rec.uid.sender},
                {"receiver", rec.uid.receiver},
                {"timestamp", rec.uid.timestamp}};
  obj["text"] = rec.text;
  obj["label"] = canonical_name(rec.label);
  return obj;
}

/// Writes the corpus as JSONL with explicit ordinals and canonical labels.
inline void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& rec : corpus.paragraphs) out << to_json(rec).dump() << '\n';
}

struct DatasetStats {
  std::size_t n_documents = 0;
  std::size_t n_paragraphs = 0;
  std::array<std::size_t, kNumLabels> per_label_paragraphs{};
  std::array<std::size_t, kNumLabels> per_label_documents{};

  bool operator==(const DatasetStats&) const = default;
};

inline DatasetStats dataset_stats(const Corpus& corpus) {
  DatasetStats stats;
  std::map<std::string, SecurityLabel> doc_labels;
  for (const auto& p : corpus.paragraphs) {
    ++stats.per_label_paragraphs[index_of(p.label)];
    auto [it, inserted] = doc_labels.emplace(p.doc_id, p.label);
    if (!inserted) {
      const std::array<SecurityLabel, 2> pair = {it->second, p.label};
      it->second = document_label(pair);
    }
  }
  stats.n_paragraphs = corpus.paragraphs.size();
  stats.n_documents = doc_labels.size();
  for (const auto& [doc, label] : doc_labels) ++stats.per_label_documents[index_of(label)];
  return stats;
}

/// CSV rows shaped like the per-dataset document and paragraph tables:
/// `scope,label,count` with a Total row followed by one row per label.
inline void write_stats_csv(const DatasetStats& stats, std::ostream& out) {
  out << "scope,label,count\n";
  out << "document,Total," << stats.n_documents << '\n';
  for (auto label : kAllLabels) {
    out << "document," << display_name(label) << ',' << stats.per_label_documents[index_of(label)]
        << '\n';
  }
  out << "paragraph,Total," << stats.n_paragraphs << '\n';
  for (auto label : kAllLabels) {
    out << "paragraph," << display_name(label) << ','
        << stats.per_label_paragraphs[index_of(label)] << '\n';
  }
}

inline nlohmann::json stats_to_json(const DatasetStats& stats, const std::string& name) {
  nlohmann::json docs = {{"Total", stats.n_documents}};
  nlohmann::json paras = {{"Total", stats.n_paragraphs}};
  for (auto label : kAllLabels) {
    docs[std::string(display_name(label))] = stats.per_label_documents[index_of(label)];
    paras[std::string(display_name(label))] = stats.per_label_paragraphs[index_of(label)];
  }
  return {{"dataset", name}, {"document", docs}, {"paragraph", paras}};
}

}  // namespace acess
