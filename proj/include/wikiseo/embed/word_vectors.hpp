#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wikiseo::embed {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Token -> dense vector. Unknown tokens map to a deterministic random unit
/// vector seeded by a hash of the token, so lookups never fail.
class WordVectorTable {
 public:
  explicit WordVectorTable(int dimension);

  /// Text format: token followed by `d` numbers per line. Ragged rows throw ParseError.
  static WordVectorTable read(std::istream& is);
  static WordVectorTable load(const std::filesystem::path& path);
  void write(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;

  void add(std::string token, const Vec& v);

  int dimension() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  Vec lookup(std::string_view token) const;
  /// One row per token.
  Mat matrix(const std::vector<std::string>& tokens) const;

  friend bool operator==(const WordVectorTable& a, const WordVectorTable& b);

 private:
  int dim_;
  std::vector<std::string> tokens_;
  std::vector<Vec> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Deterministic unit vector for an out-of-vocabulary token.
Vec oov_vector(std::string_view token, int dimension);

}  // namespace wikiseo::embed
