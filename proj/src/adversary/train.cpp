#include "wikiseo/adversary/train.hpp"

#include <cmath>
#include <ostream>

#include "wikiseo/adversary/losses.hpp"
#include "wikiseo/adversary/mgda.hpp"
#include "wikiseo/common/error.hpp"
#include "wikiseo/common/format.hpp"
#include "wikiseo/common/random.hpp"

namespace wikiseo::adversary {

using nn::Tape;
using nn::Var;
using retrieval::TextView;

TrainingExample make_example(const AttackContext& ctx, const Instance& inst, std::size_t pool_cap) {
  TrainingExample ex;
  ex.instance = inst;
  ex.query = ctx.query_view(inst.query);
  ex.paragraphs = ctx.paragraph_views(ctx.corpus().at(inst.article_id));
  for (auto& c : ctx.candidates(inst, ctx.pool(inst, pool_cap))) {
    ex.candidates.push_back(std::move(c.view));
    ex.candidate_text.push_back(std::move(c.paragraph));
  }
  if (ex.candidates.empty()) throw InfeasibleError("make_example: no injectable paragraph for " + inst.article_id);
  return ex;
}

namespace {

Mat as_row(const Vec& v) { return v.transpose(); }

std::size_t insertion_for(const retrieval::RetrievalNetwork& net, const TrainingExample& ex, const Mat& z_vec,
                          std::vector<Vec>& reps) {
  reps.clear();
  for (const auto& p : ex.paragraphs) reps.push_back(net.representation(p));
  return retrieval::insertion_position(reps, z_vec.row(0).transpose()).index;
}

// The four losses of (z_vec, z_seq) placed at gap `at`. Discriminator
// parameters enter the tape as constants.
std::array<Var, kTaskCount> losses_on(Tape& tape, Var z_vec, Var z_seq, std::size_t at, const std::vector<Vec>& reps,
                                      const SubstituteRanker& ranker, const SubstituteDetector& detector,
                                      const TrainingExample& ex) {
  Eigen::Index before_rows = 0, after_rows = 0;
  for (std::size_t i = 0; i < ex.paragraphs.size(); ++i) (i <= at ? before_rows : after_rows) += ex.paragraphs[i].words.rows();
  const Eigen::Index d = ex.paragraphs.front().words.cols();
  Mat head(before_rows, d), tail(after_rows, d);
  Eigen::Index hr = 0, tr = 0;
  for (std::size_t i = 0; i < ex.paragraphs.size(); ++i) {
    const Mat& w = ex.paragraphs[i].words;
    if (i <= at) {
      head.middleRows(hr, w.rows()) = w;
      hr += w.rows();
    } else {
      tail.middleRows(tr, w.rows()) = w;
      tr += w.rows();
    }
  }
  std::vector<Var> parts{tape.constant(head), z_seq};
  if (tail.rows() > 0) parts.push_back(tape.constant(tail));

  tape.freeze_parameters(true);
  std::array<Var, kTaskCount> out;
  out[kRank] = rank_loss(ranker.score(tape, ex.query.words, nn::concat_rows(parts)));
  out[kDetect] = detect_loss(detector.probabilities(tape, z_seq, ex.paragraphs.front().words));
  tape.freeze_parameters(false);
  out[kTopic] = topic_loss(z_vec, tape.constant(as_row(reps.front())));
  out[kSem] = consistency_loss(z_vec, tape.constant(as_row(reps[at])), tape.constant(as_row(reps[at + 1])));
  return out;
}

Vec flatten(const Mat& g, Eigen::Index rows, Eigen::Index cols) {
  if (g.size() == 0) return Vec::Zero(rows * cols);
  return Eigen::Map<const Vec>(g.data(), g.size());
}

// Losses and z-gradients on a fresh frozen tape.
TaskGradients z_gradients(const Mat& z_vec, const Mat& z_seq, std::size_t at, const std::vector<Vec>& reps,
                          const SubstituteRanker& ranker, const SubstituteDetector& detector,
                          const TrainingExample& ex) {
  Tape tape;
  Var zv = tape.leaf(z_vec);
  Var zs = tape.leaf(z_seq);
  const auto losses = losses_on(tape, zv, zs, at, reps, ranker, detector, ex);
  TaskGradients g;
  g.losses.insertion_index = at;
  for (int t = 0; t < kTaskCount; ++t) {
    g.losses.loss[t] = losses[t].scalar();
    tape.backward(losses[t]);
    Vec flat(z_vec.size() + z_seq.size());
    flat << flatten(zv.grad(), zv.rows(), zv.cols()), flatten(zs.grad(), zs.rows(), zs.cols());
    g.grads[t] = std::move(flat);
  }
  return g;
}

bool finite(const std::array<double, kTaskCount>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

TaskGradients task_gradients(const retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                             const SubstituteDetector& detector, const TrainingExample& ex) {
  Tape tape;
  const auto f = net.forward(tape, ex.query, ex.paragraphs.front(), ex.candidates);
  std::vector<Vec> reps;
  const std::size_t at = insertion_for(net, ex, f.z_vec.value(), reps);
  return z_gradients(f.z_vec.value(), f.z_seq.value(), at, reps, ranker, detector, ex);
}

std::array<Var, kTaskCount> task_losses(Tape& tape, const retrieval::RetrievalNetwork& net,
                                        const SubstituteRanker& ranker, const SubstituteDetector& detector,
                                        const TrainingExample& ex) {
  const auto f = net.forward(tape, ex.query, ex.paragraphs.front(), ex.candidates);
  std::vector<Vec> reps;
  const std::size_t at = insertion_for(net, ex, f.z_vec.value(), reps);
  return losses_on(tape, f.z_vec, f.z_seq, at, reps, ranker, detector, ex);
}

TrainingLog train_retrieval(retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                            SubstituteDetector& detector, const std::vector<TrainingExample>& examples,
                            const RetrievalTrainConfig& config, const target::WikiApi* wiki,
                            const corpus::Corpus* corpus) {
  require(!config.alternating || (wiki != nullptr && corpus != nullptr),
          "train_retrieval: alternating mode needs the wiki and the corpus");
  TrainingLog log;
  nn::Adam opt(config.learning_rate);
  nn::Adam detector_opt(detector.config().learning_rate);
  Rng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs && !log.diverged; ++epoch) {
    rng.shuffle(order);
    for (auto idx : order) {
      const TrainingExample& ex = examples[idx];
      const Vec last_good = net.store().flat_values();
      Tape tape;
      const auto f = net.forward(tape, ex.query, ex.paragraphs.front(), ex.candidates);
      std::vector<Vec> reps;
      const std::size_t at = insertion_for(net, ex, f.z_vec.value(), reps);

      TrainingRecord rec;
      rec.epoch = epoch;
      rec.step = step++;
      net.store().zero_grad();
      if (config.full_gradient) {
        const auto losses = losses_on(tape, f.z_vec, f.z_seq, at, reps, ranker, detector, ex);
        std::vector<Vec> grads;
        for (int t = 0; t < kTaskCount; ++t) {
          rec.loss[t] = losses[t].scalar();
          net.store().zero_grad();
          tape.backward(losses[t]);
          grads.push_back(net.store().flat_grads());
        }
        if (!finite(rec.loss)) {
          log.diverged = true;
          break;
        }
        const auto w = mgda_weights(grads);
        std::vector<Var> terms;
        for (int t = 0; t < kTaskCount; ++t) {
          rec.weight[t] = w.weights(t);
          terms.push_back(nn::scale(losses[t], w.weights(t)));
        }
        net.store().zero_grad();
        tape.backward(nn::add(nn::add(terms[0], terms[1]), nn::add(terms[2], terms[3])));
      } else {
        const auto g = z_gradients(f.z_vec.value(), f.z_seq.value(), at, reps, ranker, detector, ex);
        rec.loss = g.losses.loss;
        if (!finite(rec.loss)) {
          log.diverged = true;
          break;
        }
        const auto w = mgda_weights(std::vector<Vec>(g.grads.begin(), g.grads.end()));
        Vec combined = Vec::Zero(g.grads[0].size());
        for (int t = 0; t < kTaskCount; ++t) {
          rec.weight[t] = w.weights(t);
          combined += w.weights(t) * g.grads[t];
        }
        const Eigen::Index nv = f.z_vec.value().size();
        const Mat gv = Eigen::Map<const Mat>(combined.data(), f.z_vec.rows(), f.z_vec.cols());
        const Mat gs = Eigen::Map<const Mat>(combined.data() + nv, f.z_seq.rows(), f.z_seq.cols());
        tape.backward(nn::add(nn::sum(nn::mul(f.z_vec, tape.constant(gv))), nn::sum(nn::mul(f.z_seq, tape.constant(gs)))));
      }
      opt.step(net.store());
      if (!net.store().flat_values().allFinite()) {
        net.store().set_flat_values(last_good);
        log.diverged = true;
        break;
      }
      log.records.push_back(rec);

      if (config.alternating) {
        const std::size_t pick = retrieval::argmax(f.probabilities.value().row(0).transpose());
        const corpus::Article& before = corpus->at(ex.instance.article_id);
        const corpus::Article after = corpus::apply_revision(before, ex.candidate_text[pick], at);
        const bool label = wiki->detect(before, after).damaging;
        Tape dt;
        Var p = detector.probabilities(dt, dt.constant(ex.candidates[pick].words), ex.paragraphs.front().words);
        Var loss = nn::neg(nn::log(nn::clamp(nn::slice_cols(p, label ? 0 : 1, 1), 1e-12, 1.0)));
        dt.backward(loss);
        detector_opt.step(detector.store());
      }
    }
  }
  return log;
}

std::array<double, kTaskCount> mean_losses(const retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                                           const SubstituteDetector& detector,
                                           const std::vector<TrainingExample>& examples) {
  require(!examples.empty(), "mean_losses: no examples");
  std::array<double, kTaskCount> total{};
  for (const auto& ex : examples) {
    Tape tape;
    const auto losses = task_losses(tape, net, ranker, detector, ex);
    for (int t = 0; t < kTaskCount; ++t) total[t] += losses[t].scalar();
  }
  for (double& v : total) v /= static_cast<double>(examples.size());
  return total;
}

void write_training_log(const TrainingLog& log, std::ostream& os) {
  os << "epoch\tstep\tL_rank\tL_detect\tL_topic\tL_sem\tw_rank\tw_detect\tw_topic\tw_sem\n";
  for (const auto& r : log.records) {
    os << r.epoch << '\t' << r.step;
    for (double v : r.loss) os << '\t' << format_double(v);
    for (double v : r.weight) os << '\t' << format_double(v);
    os << '\n';
  }
  if (log.diverged) os << "# diverged; parameters restored to the last finite state\n";
}

}  // namespace wikiseo::adversary
