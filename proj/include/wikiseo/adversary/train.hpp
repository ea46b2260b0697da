#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wikiseo/adversary/attack.hpp"
#include "wikiseo/adversary/detector.hpp"
#include "wikiseo/adversary/ranker.hpp"
#include "wikiseo/retrieval/network.hpp"

namespace wikiseo::adversary {

enum Task { kRank = 0, kDetect = 1, kTopic = 2, kSem = 3 };
constexpr int kTaskCount = 4;

/// Everything one training step needs, precomputed from an Instance.
struct TrainingExample {
  Instance instance;
  retrieval::TextView query;
  std::vector<retrieval::TextView> paragraphs;  // article, in order
  std::vector<retrieval::TextView> candidates;
  std::vector<corpus::Paragraph> candidate_text;
};

TrainingExample make_example(const AttackContext& ctx, const Instance& inst, std::size_t pool_cap);

struct TaskLosses {
  std::array<double, kTaskCount> loss{};
  std::size_t insertion_index = 0;
};

/// Per-task losses and gradients with respect to the shared soft
/// representation (z_vec and z_seq flattened into one vector).
struct TaskGradients {
  TaskLosses losses;
  std::array<Vec, kTaskCount> grads;
};

struct RetrievalTrainConfig {
  int epochs = 3;
  double learning_rate = 0.005;
  std::size_t pool_cap = 64;
  /// MGDA on full retrieval-parameter gradients instead of the shared representation.
  bool full_gradient = false;
  /// Also take one substitute-detector step per example on the hard pick,
  /// labeled through the wiki's detect().
  bool alternating = false;
  std::uint64_t seed = 31;
};

struct TrainingRecord {
  int epoch = 0;
  std::size_t step = 0;
  std::array<double, kTaskCount> loss{};
  std::array<double, kTaskCount> weight{};
};

struct TrainingLog {
  std::vector<TrainingRecord> records;
  bool diverged = false;
};

/// Task losses of the network's soft representation on one example; the
/// ranker and detector are not updated. Gradients land on z only.
TaskGradients task_gradients(const retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                             const SubstituteDetector& detector, const TrainingExample& ex);

/// Same losses, with gradients flowing into the retrieval parameters.
std::array<nn::Var, kTaskCount> task_losses(nn::Tape& tape, const retrieval::RetrievalNetwork& net,
                                            const SubstituteRanker& ranker, const SubstituteDetector& detector,
                                            const TrainingExample& ex);

/// Descends the MGDA-weighted sum of the four losses on the retrieval
/// parameters only. On a non-finite loss or parameter the last finite state
/// is restored and the log is marked diverged.
TrainingLog train_retrieval(retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                            SubstituteDetector& detector, const std::vector<TrainingExample>& examples,
                            const RetrievalTrainConfig& config, const target::WikiApi* wiki = nullptr,
                            const corpus::Corpus* corpus = nullptr);

/// Mean of each task loss over the examples.
std::array<double, kTaskCount> mean_losses(const retrieval::RetrievalNetwork& net, const SubstituteRanker& ranker,
                                           const SubstituteDetector& detector,
                                           const std::vector<TrainingExample>& examples);

/// Tab-separated curve: epoch, step, four losses, four weights.
void write_training_log(const TrainingLog& log, std::ostream& os);

}  // namespace wikiseo::adversary
