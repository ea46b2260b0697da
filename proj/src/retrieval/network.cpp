#include "wikiseo/retrieval/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "wikiseo/common/error.hpp"

namespace wikiseo::retrieval {

using nn::Tape;
using nn::Var;

namespace {

constexpr double kNormFloor = 1e-12;

Mat normalized_rows(const Mat& m) {
  Mat out = m;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    out.row(r) = n < kNormFloor ? Eigen::RowVectorXd::Zero(m.cols()) : Eigen::RowVectorXd(m.row(r) / n);
  }
  return out;
}

Vec softmax(const Vec& v) {
  Vec e = (v.array() - v.maxCoeff()).exp();
  return e / e.sum();
}

double plain_cosine(const Vec& a, const Vec& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < kNormFloor || nb < kNormFloor) return 0.0;
  return a.dot(b) / (na * nb);
}

Vec mlp_forward(const nn::Mlp& mlp, const Vec& x) {
  Eigen::RowVectorXd h = x.transpose();
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    h = h * mlp.layers[i].w->value + mlp.layers[i].b->value;
    if (i + 1 < mlp.layers.size() || mlp.last == nn::Activation::kTanh) h = h.array().tanh().matrix();
  }
  return h.transpose();
}

Mat row(const Vec& v) { return v.transpose(); }

}  // namespace

TextView view_of(const std::vector<std::string>& tokens, const embed::MeanPoolEncoder& encoder) {
  require(!tokens.empty(), "view_of: empty token list");
  return TextView{encoder.table().matrix(tokens), encoder.encode(tokens).v};
}

double word_density(const Mat& query_words, const Mat& paragraph_words, int k) {
  require(query_words.rows() > 0 && paragraph_words.rows() > 0, "word_density: empty input");
  require(k >= 1, "word_density: k must be positive");
  require(query_words.cols() == paragraph_words.cols(), "word_density: dimension mismatch");
  const Mat c = normalized_rows(query_words) * normalized_rows(paragraph_words).transpose();
  const auto kk = std::min<Eigen::Index>(k, c.cols());
  double total = 0.0;
  std::vector<double> r(static_cast<std::size_t>(c.cols()));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) r[static_cast<std::size_t>(j)] = c(i, j);
    std::partial_sort(r.begin(), r.begin() + kk, r.end(), std::greater<>());
    const double top = std::accumulate(r.begin(), r.begin() + kk, 0.0) / static_cast<double>(kk);
    total += 0.5 * (r.front() + top);
  }
  return total;
}

Vec selector_probabilities(const Vec& sim_q, const Vec& sim_a) {
  require(sim_q.size() > 0 && sim_q.size() == sim_a.size(), "selector_probabilities: bad sizes");
  return softmax(sim_q) + softmax(sim_a);
}

std::size_t argmax(const Vec& v) {
  require(v.size() > 0, "argmax: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

std::vector<std::size_t> top_k_indices(const Vec& v, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&v](std::size_t a, std::size_t b) {
                      const auto ea = v(static_cast<Eigen::Index>(a)), eb = v(static_cast<Eigen::Index>(b));
                      return ea > eb || (ea == eb && a < b);
                    });
  idx.resize(k);
  return idx;
}

SoftWeights soft_weights(const Vec& probabilities, int k) {
  require(k >= 1 && k <= probabilities.size(), "soft_weights: k out of range");
  SoftWeights s;
  s.indices = top_k_indices(probabilities, static_cast<std::size_t>(k));
  s.weights.resize(k);
  for (int i = 0; i < k; ++i) s.weights(i) = probabilities(static_cast<Eigen::Index>(s.indices[i]));
  const double total = s.weights.sum();
  if (!(total > 0.0)) throw NumericError("soft_weights: non-positive mass");
  s.weights /= total;
  return s;
}

Vec soft_representation(const std::vector<Vec>& representations, const Vec& probabilities, int k) {
  require(static_cast<Eigen::Index>(representations.size()) == probabilities.size(),
          "soft_representation: one probability per candidate");
  const SoftWeights s = soft_weights(probabilities, k);
  Vec z = Vec::Zero(representations[s.indices.front()].size());
  for (int i = 0; i < k; ++i) z += s.weights(i) * representations[s.indices[i]];
  return z;
}

InsertionChoice insertion_position(const std::vector<Vec>& paragraphs, const Vec& p) {
  require(paragraphs.size() >= 2, "insertion_position: need at least two paragraphs");
  Vec g(static_cast<Eigen::Index>(paragraphs.size() - 1));
  for (std::size_t i = 0; i + 1 < paragraphs.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = 0.5 * (plain_cosine(p, paragraphs[i]) + plain_cosine(p, paragraphs[i + 1]));
  }
  InsertionChoice c;
  c.probabilities = softmax(g);
  c.index = argmax(g);
  return c;
}

RetrievalNetwork::RetrievalNetwork(const RetrievalConfig& config) : config_(config) {
  require(config.pool_k >= 1 && config.top_k >= 1, "RetrievalNetwork: k values must be positive");
  Rng rng(config.seed);
  const std::vector<Eigen::Index> sizes{config.word_dim, config.hidden, config.latent};
  article_tower_ = nn::Mlp(store_, "article_tower", sizes, rng, nn::Activation::kTanh);
  query_tower_ = nn::Mlp(store_, "query_tower", sizes, rng, nn::Activation::kTanh);
  word_encoder_ = nn::Linear(store_, "word_encoder", config.word_dim, config.word_latent, rng);
}

double RetrievalNetwork::semantic_similarity(const Vec& article, const Vec& paragraph) const {
  return plain_cosine(mlp_forward(article_tower_, article), mlp_forward(article_tower_, paragraph));
}

double RetrievalNetwork::query_semantic_similarity(const Vec& query, const Vec& paragraph) const {
  return plain_cosine(mlp_forward(query_tower_, query), mlp_forward(query_tower_, paragraph));
}

Mat RetrievalNetwork::encode_words(const Mat& words) const {
  Mat h = words * word_encoder_.w->value;
  h.rowwise() += Eigen::RowVectorXd(word_encoder_.b->value.row(0));
  return h.array().tanh().matrix();
}

double RetrievalNetwork::word_density_similarity(const Mat& query_words, const Mat& paragraph_words) const {
  return word_density(encode_words(query_words), encode_words(paragraph_words), config_.pool_k);
}

double RetrievalNetwork::query_similarity(const TextView& query, const TextView& paragraph) const {
  return query_semantic_similarity(query.sentence, paragraph.sentence) *
         word_density_similarity(query.words, paragraph.words);
}

Vec RetrievalNetwork::representation(const TextView& text) const {
  Vec r(representation_dim());
  r << text.sentence, encode_words(text.words).colwise().mean().transpose();
  return r;
}

RetrievalOutput RetrievalNetwork::select(const TextView& query, const TextView& lead,
                                         const std::vector<TextView>& candidates) const {
  require(!candidates.empty(), "select: empty candidate set");
  const auto n = static_cast<Eigen::Index>(candidates.size());
  RetrievalOutput out;
  out.sim_q.resize(n);
  out.sim_a.resize(n);
  const Vec tq = mlp_forward(query_tower_, query.sentence);
  const Vec ta = mlp_forward(article_tower_, lead.sentence);
  const Mat qenc = encode_words(query.words);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TextView& c = candidates[static_cast<std::size_t>(i)];
    const double dens = word_density(qenc, encode_words(c.words), config_.pool_k);
    out.sim_q(i) = plain_cosine(tq, mlp_forward(query_tower_, c.sentence)) * dens;
    out.sim_a(i) = plain_cosine(ta, mlp_forward(article_tower_, c.sentence));
  }
  out.probabilities = selector_probabilities(out.sim_q, out.sim_a);
  out.argmax_index = argmax(out.probabilities);
  return out;
}

Var RetrievalNetwork::density(Tape& tape, Var query_enc, const Mat& paragraph_words) const {
  Var penc = tanh(word_encoder_(tape, tape.constant(paragraph_words)));
  Var c = nn::cosine_matrix(query_enc, penc);  // m x n
  std::vector<Var> scores;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    Var r = nn::slice_rows(c, i, 1);
    scores.push_back(nn::add(nn::kmax(r, 1), nn::topk_mean(r, config_.pool_k)));
  }
  return nn::scale(nn::sum(nn::concat_cols(scores)), 0.5);
}

TrainingForward RetrievalNetwork::forward(Tape& tape, const TextView& query, const TextView& lead,
                                          const std::vector<TextView>& candidates) const {
  require(!candidates.empty(), "forward: empty candidate set");
  Var tq = query_tower_(tape, tape.constant(row(query.sentence)));
  Var ta = article_tower_(tape, tape.constant(row(lead.sentence)));
  Var qenc = tanh(word_encoder_(tape, tape.constant(query.words)));
  std::vector<Var> sq, sa;
  for (const TextView& c : candidates) {
    Var s = tape.constant(row(c.sentence));
    sq.push_back(nn::mul(nn::cosine(tq, query_tower_(tape, s)), density(tape, qenc, c.words)));
    sa.push_back(nn::cosine(ta, article_tower_(tape, s)));
  }
  TrainingForward f;
  f.probabilities = nn::add(nn::softmax_rows(nn::concat_cols(sq)), nn::softmax_rows(nn::concat_cols(sa)));

  const int k = std::min<int>(config_.top_k, static_cast<int>(candidates.size()));
  f.selected.indices = top_k_indices(f.probabilities.value().row(0).transpose(), static_cast<std::size_t>(k));
  std::vector<Eigen::Index> idx(f.selected.indices.begin(), f.selected.indices.end());
  f.weights = nn::normalize_sum(nn::gather(f.probabilities, idx));
  f.selected.weights = f.weights.value().row(0).transpose();

  Eigen::Index longest = 0;
  for (auto i : f.selected.indices) longest = std::max(longest, candidates[i].words.rows());
  std::vector<Var> reps, seqs;
  for (auto i : f.selected.indices) {
    const TextView& c = candidates[i];
    Var enc = tanh(word_encoder_(tape, tape.constant(c.words)));
    reps.push_back(nn::concat_cols({tape.constant(row(c.sentence)), nn::mean_rows(enc)}));
    seqs.push_back(nn::pad_rows(tape.constant(c.words), longest));
  }
  f.z_vec = nn::weighted_sum(f.weights, reps);
  f.z_seq = nn::weighted_sum(f.weights, seqs);
  return f;
}

void RetrievalNetwork::save(std::ostream& os) const {
  nlohmann::ordered_json cfg = {{"word_dim", config_.word_dim}, {"hidden", config_.hidden},
                                {"latent", config_.latent},     {"word_latent", config_.word_latent},
                                {"pool_k", config_.pool_k},     {"top_k", config_.top_k},
                                {"seed", config_.seed}};
  store_.save(os, "retrieval", cfg.dump());
}

RetrievalNetwork RetrievalNetwork::load(std::istream& is) {
  const auto cfg = nlohmann::json::parse(nn::ParameterStore::read_config(is, "retrieval"));
  RetrievalConfig c;
  c.word_dim = cfg.at("word_dim");
  c.hidden = cfg.at("hidden");
  c.latent = cfg.at("latent");
  c.word_latent = cfg.at("word_latent");
  c.pool_k = cfg.at("pool_k");
  c.top_k = cfg.at("top_k");
  c.seed = cfg.at("seed");
  RetrievalNetwork net(c);
  net.store_.load_tensors(is);
  return net;
}

}  // namespace wikiseo::retrieval
