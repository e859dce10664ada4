#pragma once

// Paragraph text -> token list.
//
// Steps, in order: split on Unicode whitespace, delete every character
// outside [A-Za-z0-9] inside each token, lowercase, drop empty tokens, drop
// stopwords. Punctuation is deleted in place, so "SECRET//NOFORN" becomes
// the single token "secretnoforn".

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "acess/stopwords.hpp"

namespace acess {

using TokenList = std::vector<std::string>;

namespace textprep {

inline bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

inline bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

/// Decodes one UTF-8 sequence starting at text[pos] and advances pos.
/// Malformed bytes decode as U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  int extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + static_cast<std::size_t>(extra) >= text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += static_cast<std::size_t>(extra) + 1;
  return cp;
}

/// CRC-32 of the stopword list in its one-word-per-line resource form.
inline std::string stopword_fingerprint() {
  std::string joined;
  for (auto w : kStopwords) {
    joined.append(w);
    joined.push_back('\n');
  }
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(joined.data()),
                         static_cast<uInt>(joined.size()));
  std::ostringstream os;
  os << "crc32:" << std::hex << std::setw(8) << std::setfill('0') << crc;
  return os.str();
}

}  // namespace textprep

inline TokenList preprocess(std::string_view text) {
  TokenList tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty() && !textprep::is_stopword(current)) tokens.push_back(current);
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = textprep::next_code_point(text, pos);
    if (textprep::is_unicode_space(cp)) {
      flush();
    } else if (cp >= 'A' && cp <= 'Z') {
      current.push_back(static_cast<char>(cp - 'A' + 'a'));
    } else if ((cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9')) {
      current.push_back(static_cast<char>(cp));
    }
  }
  flush();
  return tokens;
}

}  // namespace acess
