#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wikiseo::corpus {

/// Ordered word list with O(1) membership. Entries are stored lowercased.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> entries);

  /// One entry per line, UTF-8; blank lines and lines starting with '#' skipped.
  static Lexicon load(const std::filesystem::path& path);

  bool contains(std::string_view word) const;
  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
  std::unordered_set<std::string> set_;
};

namespace lexicons {

const Lexicon& stopwords();
/// Verbs used for role assignment in entity grids and by the generator.
const Lexicon& verbs();
/// Words after which an "in <business>" phrase reads naturally.
const Lexicon& promo_keywords();
/// Multi-word place names, lowercased, words separated by one space.
const Lexicon& geo_gazetteer();
const Lexicon& org_suffixes();
const Lexicon& blocklist();

}  // namespace lexicons
}  // namespace wikiseo::corpus
