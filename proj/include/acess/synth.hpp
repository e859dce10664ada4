#pragma once

// Seeded synthetic paragraph corpus for tests and demos.
//
// Each topic has its own disjoint vocabulary. A paragraph's sensitivity is
// carried by a few "signal" terms from a small pool shared by all topics,
// and the meaning of a signal group depends on the topic: in topic t,
// group g marks label (g + t) mod 3. No single global linear model can
// represent that cyclic topic-by-signal interaction, while a model trained
// inside one topic only needs the signal terms.

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "acess/corpus.hpp"
#include "acess/random.hpp"

namespace acess {

struct SynthOptions {
  std::size_t topics = 5;
  std::size_t paragraphs_per_topic = 400;
  std::size_t topic_vocabulary = 80;
  std::size_t common_vocabulary = 40;
  std::size_t signals_per_group = 4;
  /// Label priors for Unclassified, Confidential, Secret.
  std::array<double, kNumLabels> label_priors = {0.35, 0.45, 0.20};
  /// Probability that a paragraph's signal terms come from a random group.
  double signal_noise = 0.05;
  Seed seed = 7;
};

namespace detail {

inline std::string synth_word(const char* prefix, std::size_t a, std::size_t b) {
  static constexpr std::array<const char*, 16> kSyllables = {
      "ka", "lo", "mer", "tan", "vi", "dor", "su", "pel",
      "ran", "zu", "ex", "mo", "qui", "bar", "nel", "ost"};
  std::string w = prefix;
  std::size_t x = a * 131 + b * 7 + 3;
  for (int i = 0; i < 3; ++i) {
    w += kSyllables[x % kSyllables.size()];
    x /= kSyllables.size();
    x += b + 1;
  }
  return w + std::to_string(a) + "x" + std::to_string(b);
}

inline std::size_t zipf_pick(Rng& rng, std::size_t n) {
  // Inverse-rank weights 1/(r+1), sampled by linear scan.
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
  double u = rng.uniform() * total;
  for (std::size_t r = 0; r < n; ++r) {
    u -= 1.0 / static_cast<double>(r + 1);
    if (u < 0.0) return r;
  }
  return n - 1;
}

}  // namespace detail

inline Corpus generate_synthetic_corpus(const SynthOptions& options,
                                        std::string name = "synthetic") {
  static constexpr std::array<const char*, 8> kPosts = {
      "AMEMBASSY NORTHPORT", "AMEMBASSY EASTVALE", "AMCONSUL RIVERTON", "AMEMBASSY LAKEMONT",
      "AMEMBASSY HILLCREST", "AMCONSUL BAYSIDE", "AMEMBASSY STONEGATE", "AMCONSUL FAIRHAVEN"};
  static constexpr std::array<const char*, 6> kFiller = {"the", "of", "and", "with", "for", "on"};

  Rng rng(options.seed);
  Corpus corpus;
  corpus.name = std::move(name);

  std::vector<std::string> common;
  for (std::size_t j = 0; j < options.common_vocabulary; ++j) {
    common.push_back(detail::synth_word("com", 0, j));
  }
  std::array<std::vector<std::string>, kNumLabels> signals;
  for (std::size_t g = 0; g < kNumLabels; ++g) {
    for (std::size_t j = 0; j < options.signals_per_group; ++j) {
      signals[g].push_back(detail::synth_word("sig", g, j));
    }
  }

  std::size_t doc_serial = 0;
  for (std::size_t t = 0; t < options.topics; ++t) {
    std::vector<std::string> vocab;
    for (std::size_t j = 0; j < options.topic_vocabulary; ++j) {
      vocab.push_back(detail::synth_word("top", t + 1, j));
    }
    std::size_t produced = 0;
    while (produced < options.paragraphs_per_topic) {
      const std::size_t doc_len =
          std::min<std::size_t>(1 + rng.below(6), options.paragraphs_per_topic - produced);
      char doc_id[32];
      std::snprintf(doc_id, sizeof doc_id, "SYN%02zu-%05zu", t, doc_serial++);
      char stamp[32];
      std::snprintf(stamp, sizeof stamp, "20%02zu-%02zu-%02zuT%02zu:00:00Z",
                    static_cast<std::size_t>(3 + rng.below(7)), 1 + rng.below(12),
                    1 + rng.below(28), rng.below(24));
      for (std::size_t ordinal = 0; ordinal < doc_len; ++ordinal, ++produced) {
        const double u = rng.uniform();
        std::size_t label = 0;
        double acc = 0.0;
        for (std::size_t c = 0; c < kNumLabels; ++c) {
          acc += options.label_priors[c];
          if (u < acc) {
            label = c;
            break;
          }
          label = c;
        }
        std::size_t group = (label + kNumLabels * options.topics - t) % kNumLabels;
        if (rng.uniform() < options.signal_noise) group = rng.below(kNumLabels);

        std::vector<std::string> words;
        const std::size_t n_topic = 10 + rng.below(7);
        for (std::size_t i = 0; i < n_topic; ++i) {
          words.push_back(vocab[detail::zipf_pick(rng, vocab.size())]);
        }
        const std::size_t n_common = 3 + rng.below(4);
        for (std::size_t i = 0; i < n_common; ++i) words.push_back(common[rng.below(common.size())]);
        const std::size_t n_signal = 1 + rng.below(2);
        for (std::size_t i = 0; i < n_signal; ++i) {
          words.push_back(signals[group][rng.below(signals[group].size())]);
        }
        const std::size_t n_filler = 2 + rng.below(4);
        for (std::size_t i = 0; i < n_filler; ++i) words.push_back(kFiller[rng.below(kFiller.size())]);
        rng.shuffle(std::span<std::string>(words));

        std::string text;
        for (std::size_t i = 0; i < words.size(); ++i) {
          if (i > 0) text += (rng.below(9) == 0) ? ", " : " ";
          text += words[i];
        }
        text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        text += '.';

        ParagraphRecord rec;
        rec.doc_id = doc_id;
        rec.ordinal = ordinal;
        rec.uid = {kPosts[t % kPosts.size()], "SECSTATE WASHDC", stamp};
        rec.text = std::move(text);
        rec.label = label_from_index(label);
        corpus.paragraphs.push_back(std::move(rec));
      }
    }
  }
  return corpus;
}

}  // namespace acess
