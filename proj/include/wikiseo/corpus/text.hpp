#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wikiseo::corpus {

/// A lowercased token together with its byte span in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on non-alphanumerics, keeping hyphens that join two alphanumeric
/// runs ("co-trimoxazole" stays one token). ASCII is lowercased; bytes >= 0x80
/// are treated as word characters so UTF-8 sequences are never split.
std::vector<Token> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

/// Sentence boundaries are [.!?] followed by whitespace and an uppercase
/// letter, unless the word before the mark is a known abbreviation.
std::vector<std::string> split_sentences(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens, std::string_view sep = " ");

bool is_abbreviation(std::string_view word);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Counts non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace wikiseo::corpus
