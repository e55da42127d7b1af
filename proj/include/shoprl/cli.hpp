#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shoprl/catalog.hpp"
#include "shoprl/errors.hpp"
#include "shoprl/eval.hpp"
#include "shoprl/train.hpp"

namespace shoprl {

/// Schema violation or missing required setting; exit status 1.
struct ConfigError : ParameterError {
  using ParameterError::ParameterError;
};

/// A stage input that does not exist yet; exit status 1.
struct MissingInputError : NotFoundError {
  using NotFoundError::NotFoundError;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "runs/desk";

  std::size_t n_products = 1000;
  std::size_t n_categories = 40;
  std::size_t attr_vocab_size = 96;
  OptionMap option_vocab = default_option_vocab();

  std::size_t n_train_goals = 1200;
  std::size_t n_eval_goals = 500;
  std::size_t max_steps = 30;

  double oracle_noise = 0.05;
  std::size_t n_oracle_trajectories = 1200;

  std::size_t d = 4096;
  std::size_t k = 64;

  TrainConfig il;
  TrainConfig ppo;
  TrainConfig dpo;

  std::size_t selfplay_n = 100;
  std::size_t selfplay_max_attempts = 10000;
  bool selfplay_prune = true;

  std::size_t eval_runs = 5;
  std::size_t eval_rollouts = 1000;
};

/// Strict parse: unknown keys, wrong types and a missing master_seed are
/// ConfigErrors.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);

/// Per-stage seed: derive_seed(master_seed, stage).
std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view stage);

struct ManifestEntry {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;

  bool operator==(const ManifestEntry&) const = default;
};

std::string sha256_hex(const std::filesystem::path& file);
/// Every regular file under dir except manifest.json, sorted by relative path.
std::vector<ManifestEntry> scan_artifacts(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

/// The pipeline stages. Each one reads its inputs from and writes its outputs
/// to the output directory, then refreshes the manifest.
class Pipeline {
 public:
  Pipeline(ExperimentConfig cfg, std::filesystem::path out_dir, std::ostream& log);

  const ExperimentConfig& config() const { return cfg_; }
  const std::filesystem::path& out_dir() const { return out_; }
  std::filesystem::path path(std::string_view artifact) const { return out_ / artifact; }

  void gen_catalog();
  void gen_goals();
  void gen_oracle();
  void train_il(const std::filesystem::path& trajectories);
  void train_ppo(const std::filesystem::path& init);
  void train_dpo(const std::filesystem::path& trajectories, const std::filesystem::path& ref,
                 const std::string& name);
  void gen_selfplay(const std::filesystem::path& policy);
  EvalReport eval_thompson(const std::vector<std::pair<std::string, std::filesystem::path>>& agents,
                           const std::string& name);
  void report(const std::vector<std::filesystem::path>& run_csvs);
  void repro();

 private:
  void finish(std::string_view stage);

  ExperimentConfig cfg_;
  std::filesystem::path out_;
  std::ostream* log_;
};

/// Entry point of the shoprl tool. Exit status 0 on success, 1 on usage,
/// config or missing-input errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shoprl
