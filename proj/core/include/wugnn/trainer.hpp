#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wugnn/channel.hpp"
#include "wugnn/models.hpp"
#include "wugnn/wmmse.hpp"

namespace wugnn::train {

enum class Split { train, val, test };
std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct SplitCounts {
  std::size_t train = 2000;
  std::size_t val = 200;
  std::size_t test = 500;
};

struct SplitData {
  std::vector<std::uint64_t> seeds;
  std::vector<channel::NetworkInstance> instances;
  std::vector<channel::InterferenceGraph> graphs;  // normalized model inputs

  std::size_t size() const { return instances.size(); }
};

/// Instance seeds are base_seed + offset: train first, then val, then test.
struct Dataset {
  channel::ChannelConfig channel;
  SplitCounts counts;
  std::uint64_t base_seed = 0;
  channel::NormScheme norm = channel::NormScheme::log1p;
  SplitData train;
  SplitData val;
  SplitData test;

  const SplitData& split(Split s) const;
};

Dataset make_dataset(const channel::ChannelConfig& channel, const SplitCounts& counts, std::uint64_t base_seed,
                     channel::NormScheme norm = channel::NormScheme::log1p);

/// JSON file holding every instance (seed and gains) of each split; graphs
/// are rebuilt on load.
void save_dataset(const std::string& path, const Dataset& dataset);
/// Throws FormatError on malformed content and IoError when unreadable.
Dataset load_dataset(const std::string& path);

/// Builds normalized graphs for standalone instances (e.g. evaluation sweeps).
SplitData make_split(std::vector<channel::NetworkInstance> instances,
                     channel::NormScheme norm = channel::NormScheme::log1p);

struct TrainConfig {
  model::ModelKind kind = model::ModelKind::wugnn;
  model::WugnnSpec wugnn = model::WugnnSpec::make();
  model::GnnBaselineSpec baseline = model::GnnBaselineSpec::make();
  channel::ChannelConfig channel;
  SplitCounts counts;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t lr_decay_every = 80;
  double lr_decay_factor = 0.5;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One mini-batch: the model's graph view plus the sum-rate terms.
struct TrainBatch {
  model::GraphBatch graph;
  model::RateTerms rates;
  std::size_t count = 0;
};

TrainBatch make_train_batch(const SplitData& data, std::span<const std::size_t> indices);
TrainBatch make_train_batch(const SplitData& data);

/// Negative mean sum rate over the batch; no labels involved.
diff::Tensor loss(diff::Tape& tape, const model::Model& model, const TrainBatch& batch);

/// Mean sum rate of the model over a split, evaluated in chunks without a tape.
double mean_sum_rate(const model::Model& model, const SplitData& data, std::size_t chunk = 256);

struct CurvePoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_mean_rate;
};

struct TrainedModel {
  model::Model model;  // best-validation parameters
  std::vector<CurvePoint> curve;
  std::size_t trained_n = 0;
  std::size_t best_epoch = 0;
  double best_val_rate = 0.0;
  double initial_val_rate = 0.0;
  channel::ChannelConfig channel;
};

TrainedModel train(const TrainConfig& config, const Dataset& dataset);

/// CSV "epoch,train_loss,val_mean_rate"; the last field is empty on epochs
/// without validation.
void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out);

void save_trained(const std::string& path, const TrainedModel& trained);
/// Throws FormatError when the stored parameters do not fit the stored spec.
TrainedModel load_trained(const std::string& path);

struct EvalReport {
  std::size_t n = 0;
  std::size_t instance_count = 0;
  std::vector<double> model_rates;
  std::vector<double> wmmse_rates;
  double model_mean = 0.0;
  double wmmse_mean = 0.0;
  double ratio = 0.0;
  double model_seconds_mean = 0.0;
  double wmmse_seconds_mean = 0.0;
};

EvalReport evaluate(const model::Model& model, const SplitData& data, const wmmse::WmmseSettings& settings);

nlohmann::json to_json(const EvalReport& report);

}  // namespace wugnn::train
