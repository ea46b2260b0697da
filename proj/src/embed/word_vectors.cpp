#include "wikiseo/embed/word_vectors.hpp"

#include <fstream>
#include <sstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/format.hpp"
#include "wikiseo/common/random.hpp"

namespace wikiseo::embed {

WordVectorTable::WordVectorTable(int dimension) : dim_(dimension) {
  if (dimension < 8) throw ContractError("word vectors: dimension must be >= 8");
}

WordVectorTable WordVectorTable::read(std::istream& is) {
  std::string line;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  int dim = -1;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token, num;
    if (!(ls >> token)) continue;
    std::vector<double> values;
    while (ls >> num) values.push_back(parse_double(num));
    if (dim < 0) dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dim) {
      throw ParseError("word vectors line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " values, got " + std::to_string(values.size()));
    }
    rows.emplace_back(std::move(token), std::move(values));
  }
  if (dim < 8) throw ParseError("word vectors: dimension must be >= 8");
  WordVectorTable t(dim);
  for (auto& [tok, vals] : rows) t.add(std::move(tok), Eigen::Map<const Vec>(vals.data(), dim));
  return t;
}

WordVectorTable WordVectorTable::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifactError("cannot open word vectors: " + path.string());
  return read(is);
}

void WordVectorTable::write(std::ostream& os) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    os << tokens_[i];
    for (Eigen::Index k = 0; k < dim_; ++k) os << ' ' << format_double(vectors_[i](k));
    os << '\n';
  }
}

void WordVectorTable::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw MissingArtifactError("cannot write word vectors: " + path.string());
  write(os);
}

void WordVectorTable::add(std::string token, const Vec& v) {
  if (v.size() != dim_) throw ContractError("word vectors: dimension mismatch for '" + token + "'");
  if (index_.count(token)) throw IntegrityError("word vectors: duplicate token '" + token + "'");
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  vectors_.push_back(v);
}

bool WordVectorTable::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

Vec WordVectorTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return vectors_[it->second];
  return oov_vector(token, dim_);
}

Mat WordVectorTable::matrix(const std::vector<std::string>& tokens) const {
  Mat m(static_cast<Eigen::Index>(tokens.size()), dim_);
  for (std::size_t i = 0; i < tokens.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = lookup(tokens[i]).transpose();
  return m;
}

bool operator==(const WordVectorTable& a, const WordVectorTable& b) {
  return a.dim_ == b.dim_ && a.tokens_ == b.tokens_ && a.vectors_ == b.vectors_;
}

Vec oov_vector(std::string_view token, int dimension) {
  Rng rng(fnv1a(token));
  Vec v(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) v(i) = rng.normal();
  return v / v.norm();
}

}  // namespace wikiseo::embed
