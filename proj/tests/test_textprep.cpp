#include <catch_amalgamated.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "acess/random.hpp"
#include "acess/textprep.hpp"

using namespace acess;

namespace {

std::string join(const TokenList& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "The",  "embassy", "REPORTED", "secret//noforn", "C/FORN", "...", "a", "of",
      "2009", "\t",      "\n",       "\xc2\xa0",       "caf\xc3\xa9", "\xe2\x80\x83", "x-y",
      "!",    "Troop",   "levels",   "\xff",           "\xe3\x80\x80", "AND", "\xc3"};
  std::string out;
  const auto n = rng.below(20);
  for (std::size_t i = 0; i < n; ++i) {
    out += pieces[rng.below(pieces.size())];
    if (rng.below(3) != 0) out += ' ';
  }
  return out;
}

}  // namespace

TEST_CASE("preprocess examples", "[textprep]") {
  CHECK(preprocess("The Embassy reported.") == TokenList{"embassy", "reported"});
  CHECK(preprocess("").empty());
  CHECK(preprocess("SECRET//NOFORN update") == TokenList{"secretnoforn", "update"});
}

TEST_CASE("unicode whitespace separates tokens", "[textprep]") {
  CHECK(preprocess("alpha\xc2\xa0" "beta") == TokenList{"alpha", "beta"});
  CHECK(preprocess("alpha\xe2\x80\x83" "beta\xe3\x80\x80gamma") ==
        TokenList{"alpha", "beta", "gamma"});
  CHECK(preprocess("caf\xc3\xa9 na\xc3\xafve") == TokenList{"caf", "nave"});
}

TEST_CASE("tokens that reduce to nothing or to stopwords disappear", "[textprep]") {
  CHECK(preprocess("... !!! --").empty());
  CHECK(preprocess("THE and Of").empty());
  CHECK(preprocess("T.H.E") == TokenList{});
}

TEST_CASE("output is idempotent, clean and stopword free", "[textprep]") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto text = random_text(rng);
    const auto tokens = preprocess(text);
    CHECK(preprocess(join(tokens)) == tokens);
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      CHECK_FALSE(textprep::is_stopword(t));
      for (char c : t) CHECK(((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')));
    }
    CHECK(preprocess(text) == tokens);
  }
}

TEST_CASE("embedded stopword list matches the resource file", "[textprep]") {
  std::ifstream in(std::string(ACESS_SOURCE_DIR) + "/resources/stopwords_en.txt");
  REQUIRE(in);
  std::vector<std::string> words;
  for (std::string w; std::getline(in, w);) {
    if (!w.empty()) words.push_back(w);
  }
  REQUIRE(words.size() == textprep::kStopwords.size());
  for (std::size_t i = 0; i < words.size(); ++i) CHECK(words[i] == textprep::kStopwords[i]);
  CHECK(std::is_sorted(words.begin(), words.end()));
  CHECK(textprep::stopword_fingerprint().rfind("crc32:", 0) == 0);
  CHECK(textprep::stopword_fingerprint().size() == 14);
}
