#include "wikiseo/embed/sentence.hpp"

#include <algorithm>

#include "wikiseo/common/error.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::embed {

SentenceVector SentenceEncoder::encode_text(std::string_view text) const { return encode(corpus::tokenize(text)); }

SentenceVector MeanPoolEncoder::encode(const std::vector<std::string>& tokens) const {
  SentenceVector out;
  out.v = Vec::Zero(table_.dimension());
  for (const auto& t : tokens) out.v += table_.lookup(t);
  const double n = out.v.norm();
  if (tokens.empty() || n < 1e-12) {
    out.v.setZero();
    out.empty = true;
    return out;
  }
  out.v /= n;
  out.empty = false;
  return out;
}

double cosine(const Vec& u, const Vec& v) {
  require(u.size() == v.size(), "cosine: dimension mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

}  // namespace wikiseo::embed
