#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wikiseo/eval/config.hpp"

namespace wikiseo::eval {

inline constexpr int kRunFormatVersion = 1;

/// Stage names in pipeline order.
const std::vector<std::string>& stage_names();

/// Config recorded in an existing run directory's manifest, if any.
std::optional<ExperimentConfig> manifest_config(const std::filesystem::path& run_dir);

/// Runs stages against one run directory. Every stage reads its inputs from
/// files written by earlier stages (MissingArtifactError names the stage to
/// run), writes its outputs under the directory and records their sizes and
/// hashes in manifest.json. A directory is bound to the config it was
/// started with; a different config is a ContractError.
class Pipeline {
 public:
  Pipeline(ExperimentConfig config, std::filesystem::path run_dir, std::ostream* log = nullptr);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  /// LookupError for an unknown stage.
  void run(const std::string& stage);
  void run_all();

  const ExperimentConfig& config() const;
  const std::filesystem::path& run_dir() const;

 private:
  struct State;
  std::unique_ptr<State> s_;
};

}  // namespace wikiseo::eval
