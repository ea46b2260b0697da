#include "wikiseo/corpus/article.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::corpus {

Paragraph::Paragraph(std::string text) : text_(std::move(text)) {
  if (trim(text_).empty()) throw IntegrityError("paragraph text is empty");
  sentences_ = split_sentences(text_);
  tokens_ = tokenize(text_);
}

std::size_t Article::token_count() const {
  std::size_t n = 0;
  for (const auto& p : paragraphs) n += p.tokens().size();
  return n;
}

std::string Article::full_text() const {
  std::string out;
  for (const auto& p : paragraphs) {
    if (!out.empty()) out += '\n';
    out += p.text();
  }
  return out;
}

void validate(const Article& a) {
  if (a.id.empty()) throw IntegrityError("article without id");
  if (a.paragraphs.size() < 2) {
    throw IntegrityError("article " + a.id + " has " + std::to_string(a.paragraphs.size()) +
                         " paragraph(s); at least 2 required");
  }
}

const Paragraph& lead_paragraph(const Article& a) { return a.paragraphs.front(); }

Article apply_revision(const Article& a, const Paragraph& p, std::size_t i) {
  require(i < a.paragraphs.size(), "apply_revision: insertion index out of range");
  Article out = a;
  out.paragraphs.insert(out.paragraphs.begin() + static_cast<std::ptrdiff_t>(i) + 1, p);
  return out;
}

Article remove_paragraph(const Article& a, std::size_t i) {
  require(i < a.paragraphs.size(), "remove_paragraph: index out of range");
  Article out = a;
  out.paragraphs.erase(out.paragraphs.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

std::size_t inserted_index(const Article& before, const Article& after) {
  const auto& b = before.paragraphs;
  const auto& a = after.paragraphs;
  require(before.id == after.id, "revision diff: article ids differ");
  require(a.size() == b.size() + 1, "revision diff: not a single-paragraph insertion");
  std::size_t k = 0;
  while (k < b.size() && a[k] == b[k]) ++k;
  for (std::size_t j = k; j < b.size(); ++j) {
    require(a[j + 1] == b[j], "revision diff: paragraphs changed besides one insertion");
  }
  while (k > 0 && a[k - 1] == a[k]) --k;
  return k;
}

void Corpus::add(Article a) {
  validate(a);
  if (index_.count(a.id) > 0) throw IntegrityError("duplicate article id " + a.id);
  for (const auto& p : pool_) {
    if (p.id == a.id) throw IntegrityError("duplicate article id " + a.id);
  }
  index_.emplace(a.id, articles_.size());
  articles_.push_back(std::move(a));
}

void Corpus::add_pool_article(Article a) {
  validate(a);
  if (index_.count(a.id) > 0) throw IntegrityError("duplicate article id " + a.id);
  for (const auto& p : pool_) {
    if (p.id == a.id) throw IntegrityError("duplicate article id " + a.id);
  }
  for (const auto& p : a.paragraphs) raw_.push_back(RawParagraph{a.id, p});
  pool_.push_back(std::move(a));
}

const Article& Corpus::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("unknown article " + id);
  return articles_[it->second];
}

namespace {

Article parse_record(const nlohmann::json& j, bool& pool) {
  Article a;
  a.id = j.at("id").get<std::string>();
  a.title = j.at("title").get<std::string>();
  a.category_tags = j.at("category_tags").get<std::vector<std::string>>();
  for (const auto& p : j.at("paragraphs")) a.paragraphs.emplace_back(p.get<std::string>());
  pool = j.contains("role") && j.at("role").get<std::string>() == "pool";
  return a;
}

nlohmann::ordered_json to_record(const Article& a, bool pool) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["title"] = a.title;
  j["category_tags"] = a.category_tags;
  nlohmann::ordered_json ps = nlohmann::ordered_json::array();
  for (const auto& p : a.paragraphs) ps.push_back(p.text());
  j["paragraphs"] = ps;
  if (pool) j["role"] = "pool";
  return j;
}

}  // namespace

Corpus read_corpus(std::istream& is) {
  Corpus c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Article a;
    bool pool = false;
    try {
      a = parse_record(nlohmann::json::parse(line), pool);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const IntegrityError& e) {
      throw IntegrityError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (pool) {
        c.add_pool_article(std::move(a));
      } else {
        c.add(std::move(a));
      }
    } catch (const IntegrityError& e) {
      throw IntegrityError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus " + path.string());
  return read_corpus(in);
}

void write_corpus(const Corpus& c, std::ostream& os) {
  for (const auto& a : c.articles()) os << to_record(a, false).dump() << '\n';
  for (const auto& a : c.pool_articles()) os << to_record(a, true).dump() << '\n';
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write corpus " + path.string());
  write_corpus(c, out);
}

}  // namespace wikiseo::corpus
