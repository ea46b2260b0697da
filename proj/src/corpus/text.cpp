#include "wikiseo/corpus/text.hpp"

#include <algorithm>
#include <array>

namespace wikiseo::corpus {
namespace {

bool word_char(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "approx", "no", "fig", "u.s"};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<Token> tokenize_spans(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t b = i;
    while (i < n) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (word_char(c)) {
        ++i;
      } else if (c == '-' && i + 1 < n && word_char(static_cast<unsigned char>(text[i + 1]))) {
        ++i;
      } else {
        break;
      }
    }
    out.push_back(Token{to_lower(text.substr(b, i - b)), b, i});
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.text));
  return out;
}

bool is_abbreviation(std::string_view word) {
  const std::string w = to_lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end();
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    if (j >= n || !space(static_cast<unsigned char>(text[j]))) continue;
    while (j < n && space(static_cast<unsigned char>(text[j]))) ++j;
    if (j >= n || !(text[j] >= 'A' && text[j] <= 'Z')) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && (word_char(static_cast<unsigned char>(text[w - 1])) || text[w - 1] == '.')) --w;
      if (is_abbreviation(text.substr(w, i - w))) continue;
    }
    std::string s = trim(text.substr(start, i + 1 - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = j;
  }
  std::string tail = trim(text.substr(std::min(start, n)));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace wikiseo::corpus
