#pragma once

// YAML run configuration with sections channel, model, train, wmmse and
// bench. Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "wugnn/bench.hpp"
#include "wugnn/channel.hpp"
#include "wugnn/trainer.hpp"
#include "wugnn/wmmse.hpp"

namespace wugnn::tools {

struct BenchSection {
  std::vector<std::size_t> sizes = {10, 20, 30, 50, 70, 100};
  std::size_t trials_per_size = 50;
  std::size_t repetitions = 20;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
};

struct ModelDims {
  std::size_t k_layers = 3;
  std::size_t hidden_dim = 8;
  std::size_t mlp_hidden = 16;
  bool share_across_layers = false;
  std::size_t rounds = 3;
  std::size_t baseline_hidden_dim = 8;
};

struct AppConfig {
  // train.channel doubles as the dataset channel; its seed is the dataset
  // base seed.
  train::TrainConfig train;
  ModelDims model;
  /// Baseline hidden width; empty means matched to the WUGNN parameter count.
  std::optional<std::size_t> baseline_mlp_hidden;
  wmmse::WmmseSettings wmmse;
  BenchSection bench;

  /// Rebuilds the model specs (baseline budget matching included) after
  /// edits to their dimensions.
  void finalize();
  bench::ScalabilitySettings scalability(std::size_t threads) const;
  bench::TimingSettings timing(std::size_t threads) const;
  nlohmann::json to_json() const;
};

AppConfig default_config();

/// Throws ConfigError on malformed YAML, unknown keys or invalid values.
AppConfig parse_config(const std::string& yaml_text);
/// Throws IoError when the file cannot be read.
AppConfig load_config(const std::string& path);

/// Applies a global --seed: dataset base seed, training seed and bench seed.
void apply_seed(AppConfig& config, std::uint64_t seed);

}  // namespace wugnn::tools
