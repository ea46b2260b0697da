#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace wikiseo::corpus {

/// Paragraph text with its derived sentences and tokens. Immutable; the
/// derived lists come from split_sentences() and tokenize().
class Paragraph {
 public:
  /// Throws IntegrityError for blank text.
  explicit Paragraph(std::string text);

  const std::string& text() const { return text_; }
  const std::vector<std::string>& sentences() const { return sentences_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Paragraph& a, const Paragraph& b) { return a.text_ == b.text_; }

 private:
  std::string text_;
  std::vector<std::string> sentences_;
  std::vector<std::string> tokens_;
};

struct Article {
  std::string id;
  std::string title;
  std::vector<Paragraph> paragraphs;
  std::vector<std::string> category_tags;

  friend bool operator==(const Article&, const Article&) = default;

  std::size_t token_count() const;
  std::string full_text() const;
};

/// Throws IntegrityError unless the article has an id and >= 2 paragraphs.
void validate(const Article& a);

const Paragraph& lead_paragraph(const Article& a);

/// Returns a copy with `p` placed between paragraphs i and i+1.
Article apply_revision(const Article& a, const Paragraph& p, std::size_t i);

/// Returns a copy without paragraph i (inverse of apply_revision at i+1).
Article remove_paragraph(const Article& a, std::size_t i);

/// Index of the single paragraph inserted into `before` to obtain `after`,
/// or throws ContractError if the diff is anything else. A paragraph that
/// duplicates a neighbour is reported at the earliest position of the run.
std::size_t inserted_index(const Article& before, const Article& after);

/// Paragraph from the raw pool, tagged with the article it came from.
struct RawParagraph {
  std::string source_id;
  Paragraph paragraph;

  friend bool operator==(const RawParagraph&, const RawParagraph&) = default;
};

/// Indexed articles plus a raw-paragraph pool drawn from separate pool
/// articles. Pool articles are never indexed.
class Corpus {
 public:
  void add(Article a);
  void add_pool_article(Article a);

  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  const Article& at(const std::string& id) const;
  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }

  const std::vector<Article>& articles() const { return articles_; }
  const std::vector<Article>& pool_articles() const { return pool_; }
  const std::vector<RawParagraph>& raw_paragraphs() const { return raw_; }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.articles_ == b.articles_ && a.pool_ == b.pool_;
  }

 private:
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Article> pool_;
  std::vector<RawParagraph> raw_;
};

/// One JSON record per line: {"id","title","category_tags","paragraphs"};
/// records carrying "role":"pool" feed the raw-paragraph pool.
Corpus read_corpus(std::istream& is);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& c, std::ostream& os);
void save_corpus(const Corpus& c, const std::filesystem::path& path);

}  // namespace wikiseo::corpus
