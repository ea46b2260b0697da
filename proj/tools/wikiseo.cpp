#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wikiseo/eval/config.hpp"
#include "wikiseo/eval/pipeline.hpp"

using namespace wikiseo;

int main(int argc, char** argv) {
  CLI::App app{"Wiki search-promotion attack and defense experiments"};
  app.require_subcommand(1);

  std::string config_path, run_dir = "run", corpus_path, queries_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config; defaults to the run's manifest, then built-in defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--run-dir", run_dir, "Run directory")->capture_default_str();
  app.add_option("--corpus", corpus_path, "Corpus JSONL to use instead of synthesizing one");
  app.add_option("--queries", queries_path, "Query list, one per line");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  std::string chosen;
  for (const auto& name : eval::stage_names()) {
    app.add_subcommand(name, "Run the " + name + " stage")->callback([&chosen, name] { chosen = name; });
  }
  app.add_subcommand("run-all", "Run every stage in order")->callback([&chosen] { chosen = "run-all"; });
  app.add_subcommand("show-config", "Print the effective config")->callback([&chosen] { chosen = "show-config"; });

  CLI11_PARSE(app, argc, argv);

  try {
    eval::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = eval::load_config(config_path);
    } else if (auto existing = eval::manifest_config(run_dir)) {
      cfg = *existing;
    }
    if (seed) cfg.seed = *seed;
    if (!corpus_path.empty()) cfg.corpus.path = corpus_path;
    if (!queries_path.empty()) cfg.corpus.queries_path = queries_path;

    if (chosen == "show-config") {
      std::cout << eval::config_json(cfg) << '\n';
      return 0;
    }
    eval::Pipeline pipeline(cfg, run_dir, quiet ? nullptr : &std::cerr);
    if (chosen == "run-all") {
      pipeline.run_all();
    } else {
      pipeline.run(chosen);
    }
  } catch (const std::exception& e) {
    std::cerr << "wikiseo: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
