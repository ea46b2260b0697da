#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wikiseo/embed/word_vectors.hpp"

namespace wikiseo::embed {

/// Unit-norm sentence embedding, or the zero vector with `empty` set.
struct SentenceVector {
  Vec v;
  bool empty = true;
};

class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual int dimension() const = 0;
  virtual SentenceVector encode(const std::vector<std::string>& tokens) const = 0;
  SentenceVector encode_text(std::string_view text) const;
};

/// L2-normalised mean of word vectors.
class MeanPoolEncoder : public SentenceEncoder {
 public:
  explicit MeanPoolEncoder(const WordVectorTable& table) : table_(table) {}
  int dimension() const override { return table_.dimension(); }
  SentenceVector encode(const std::vector<std::string>& tokens) const override;
  const WordVectorTable& table() const { return table_; }

 private:
  const WordVectorTable& table_;
};

/// Cosine similarity; 0 if either vector is zero. Throws ContractError on
/// dimension mismatch.
double cosine(const Vec& u, const Vec& v);

}  // namespace wikiseo::embed
