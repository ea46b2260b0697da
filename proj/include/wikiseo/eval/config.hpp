#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikiseo/adversary/detector.hpp"
#include "wikiseo/adversary/ranker.hpp"
#include "wikiseo/adversary/train.hpp"
#include "wikiseo/defense/coherence.hpp"
#include "wikiseo/injection/tagger.hpp"
#include "wikiseo/retrieval/network.hpp"
#include "wikiseo/target/gbdt.hpp"

namespace wikiseo::eval {

/// Everything a run depends on. Component seeds are mixed with `seed`
/// (see derive_seed), so one master seed moves the whole run.
struct ExperimentConfig {
  std::uint64_t seed = 7;

  struct Corpus {
    int articles = 2000;
    std::uint64_t seed = 7;
    std::string path;          // empty: synthesize
    int queries = 100;
    std::uint64_t query_seed = 1;
    std::string queries_path;  // empty: synthesize
    std::vector<std::string> promos;  // empty: the vocabulary's businesses
    std::string word_vectors;  // empty: generated from the vocabulary
  } corpus;

  struct Split {
    double train_share = 0.5;
    std::uint64_t seed = 9;
  } split;

  struct Target {
    std::size_t edits = 2000;
    std::uint64_t edit_seed = 3;
    double holdout = 0.2;
    target::GbdtParams gbdt;
  } target;

  struct Ranker {
    adversary::RankerConfig model;  // model.per_query bounds the scored pairs per query
    std::size_t depth = 200;
  } ranker;

  struct Detector {
    adversary::DetectorConfig model;
    std::size_t edits = 2000;
    std::uint64_t edit_seed = 99;
  } detector;

  struct Tagger {
    injection::TaggerConfig model;
    std::size_t examples = 800;
    std::uint64_t seed = 3;
  } tagger;

  struct Retrieval {
    retrieval::RetrievalConfig model;
    adversary::RetrievalTrainConfig training;
  } retrieval;

  struct Attack {
    std::size_t per_bucket = 10;
    std::size_t depth = 1000;
    std::size_t pool_cap = 256;
    std::uint64_t instance_seed = 4;
    std::uint64_t seed = 7;
    double keyword_density = 0.0027;
  } attack;

  struct Thresholds {
    std::size_t sample = 2000;
    std::uint64_t seed = 5;
    std::optional<double> topic;        // overrides
    std::optional<double> consistency;
  } thresholds;

  struct Coherence {
    defense::CoherenceConfig model;
    std::size_t triplets = 20000;
    std::uint64_t triplet_seed = 5;
    std::uint64_t legitimate_seed = 6;
    double margin = 0.0;
  } coherence;

  struct AdvTrain {
    std::uint64_t legitimate_seed = 8;
  } adv_train;

  struct Revenue {
    std::string view_table;  // empty: the shipped table
    double view_through_rate = 0.01;
    double revenue_per_action = 200.0;
  } revenue;
};

/// Stage seed from the master seed and a component seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t component, std::string_view salt);

/// Reads a JSON tree; missing keys keep their defaults, unknown keys are a
/// ParseError naming the path.
ExperimentConfig read_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Complete tree with every key.
std::string config_json(const ExperimentConfig& c);

}  // namespace wikiseo::eval
