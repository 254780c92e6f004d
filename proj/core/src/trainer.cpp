#include "wugnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "wugnn/checkpoint.hpp"
#include "wugnn/errors.hpp"
#include "wugnn/optim.hpp"

namespace wugnn::train {

using channel::InterferenceGraph;
using channel::NetworkInstance;
using diff::Tape;
using diff::Tensor;

std::string to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "unknown";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

const SplitData& Dataset::split(Split s) const {
  switch (s) {
    case Split::train:
      return train;
    case Split::val:
      return val;
    case Split::test:
      return test;
  }
  return test;
}

SplitData make_split(std::vector<NetworkInstance> instances, channel::NormScheme norm) {
  SplitData data;
  data.instances = std::move(instances);
  for (const auto& inst : data.instances) {
    data.seeds.push_back(inst.seed());
    data.graphs.push_back(channel::normalize_features(channel::build_graph(inst), norm));
  }
  return data;
}

Dataset make_dataset(const channel::ChannelConfig& channel, const SplitCounts& counts, std::uint64_t base_seed,
                     channel::NormScheme norm) {
  channel.validate();
  if (counts.train < 1 || counts.val < 1 || counts.test < 1) throw ConfigError("dataset split counts must be >= 1");
  Dataset ds;
  ds.channel = channel;
  ds.counts = counts;
  ds.base_seed = base_seed;
  ds.norm = norm;
  std::uint64_t next = base_seed;
  auto fill = [&](std::size_t count) {
    std::vector<NetworkInstance> instances;
    instances.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      channel::ChannelConfig c = channel;
      c.seed = next++;
      instances.push_back(channel::generate_instance(c));
    }
    SplitData data = make_split(std::move(instances), norm);
    if (channel.sparsify_threshold > 0.0) {
      for (std::size_t k = 0; k < data.size(); ++k) {
        data.graphs[k] =
            channel::normalize_features(channel::build_graph(data.instances[k], channel.sparsify_threshold), norm);
      }
    }
    return data;
  };
  ds.train = fill(counts.train);
  ds.val = fill(counts.val);
  ds.test = fill(counts.test);
  return ds;
}

void TrainConfig::validate() const {
  channel.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be > 0");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (counts.train < 1 || counts.val < 1 || counts.test < 1) throw ConfigError("dataset split counts must be >= 1");
  wugnn.validate();
  baseline.validate();
}

TrainBatch make_train_batch(const SplitData& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("batch must be nonempty");
  std::vector<const NetworkInstance*> instances;
  std::vector<const InterferenceGraph*> graphs;
  instances.reserve(indices.size());
  graphs.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= data.size()) throw ArgumentError("batch index out of range");
    instances.push_back(&data.instances[i]);
    graphs.push_back(&data.graphs[i]);
  }
  TrainBatch batch;
  batch.graph = model::make_batch(instances, graphs);
  batch.rates = model::make_rate_terms(instances);
  batch.count = indices.size();
  return batch;
}

TrainBatch make_train_batch(const SplitData& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return make_train_batch(data, all);
}

Tensor loss(Tape& tape, const model::Model& model, const TrainBatch& batch) {
  if (batch.count == 0) throw ArgumentError("loss on an empty batch");
  const Tensor v = model.forward(tape, batch.graph);
  const Tensor total = diff::sum_reduce(tape, model::node_rates(tape, batch.rates, v));
  return diff::scale(tape, total, -1.0 / static_cast<double>(batch.count));
}

double mean_sum_rate(const model::Model& model, const SplitData& data, std::size_t chunk) {
  if (data.size() == 0) throw ArgumentError("mean_sum_rate on an empty split");
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(data.size(), start + chunk); ++i) idx.push_back(i);
    const TrainBatch batch = make_train_batch(data, idx);
    Tape tape = Tape::no_grad();
    total -= loss(tape, model, batch).item() * static_cast<double>(batch.count);
  }
  return total / static_cast<double>(data.size());
}

TrainedModel train(const TrainConfig& config, const Dataset& dataset) {
  config.validate();
  if (dataset.channel.n != config.channel.n) {
    std::ostringstream oss;
    oss << "dataset was generated at n = " << dataset.channel.n << " but config.channel.n = " << config.channel.n;
    throw ArgumentError(oss.str());
  }
  if (dataset.train.size() == 0 || dataset.val.size() == 0) throw ArgumentError("train and val splits must be nonempty");

  TrainedModel result;
  result.trained_n = config.channel.n;
  result.channel = config.channel;
  model::Model working = config.kind == model::ModelKind::wugnn ? model::Model::make_wugnn(config.wugnn, config.seed)
                                                                : model::Model::make_baseline(config.baseline, config.seed);

  const double initial_val = mean_sum_rate(working, dataset.val);
  result.initial_val_rate = initial_val;
  result.best_val_rate = initial_val;
  result.best_epoch = 0;
  model::Model best = working;
  best.params = working.params.clone();

  diff::AdamState adam;
  adam.lr = config.lr;
  adam.beta1 = config.beta1;
  adam.beta2 = config.beta2;
  adam.eps = config.eps;

  // Constant seed offset keeps the shuffle stream distinct from parameter init.
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto decays = static_cast<double>((epoch - 1) / config.lr_decay_every);
    adam.lr = config.lr * std::pow(config.lr_decay_factor, decays);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const TrainBatch batch =
          make_train_batch(dataset.train, std::span<const std::size_t>(order.data() + start, stop - start));
      working.params.zero_grad();
      Tape tape;
      auto diverged = [&](const std::string& what) {
        std::ostringstream oss;
        oss << "training diverged: " << what << " at epoch " << epoch << ", batch starting at " << start;
        return DivergenceError(oss.str());
      };
      Tensor l;
      try {
        l = loss(tape, working, batch);
      } catch (const NumericalDomainError& e) {
        throw diverged(e.what());
      }
      const double value = l.item();
      if (!std::isfinite(value)) throw diverged("loss = " + std::to_string(value));
      tape.backward(l);
      diff::adam_step(working.params, diff::collect_grads(working.params), adam);
      loss_sum += value * static_cast<double>(batch.count);
    }

    CurvePoint point;
    point.epoch = epoch;
    point.train_loss = loss_sum / static_cast<double>(order.size());
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      const double val = mean_sum_rate(working, dataset.val);
      point.val_mean_rate = val;
      if (val > result.best_val_rate) {
        result.best_val_rate = val;
        result.best_epoch = epoch;
        best.params = working.params.clone();
      }
    }
    result.curve.push_back(point);
  }
  result.model = std::move(best);
  return result;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out) {
  out << "epoch,train_loss,val_mean_rate\n" << std::setprecision(17);
  for (const auto& p : curve) {
    out << p.epoch << ',' << p.train_loss << ',';
    if (p.val_mean_rate) out << *p.val_mean_rate;
    out << '\n';
  }
}

namespace {

nlohmann::json channel_json(const channel::ChannelConfig& c) {
  return {{"n", c.n},
          {"seed", c.seed},
          {"noise_power", c.noise_power},
          {"p_max", c.p_max},
          {"fading_model", channel::to_string(c.fading_model)},
          {"sparsify_threshold", c.sparsify_threshold}};
}

channel::ChannelConfig channel_from_json(const nlohmann::json& j) {
  channel::ChannelConfig c;
  c.n = j.at("n").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.noise_power = j.at("noise_power").get<double>();
  c.p_max = j.at("p_max").get<double>();
  c.fading_model = channel::fading_model_from_string(j.at("fading_model").get<std::string>());
  c.sparsify_threshold = j.at("sparsify_threshold").get<double>();
  return c;
}

}  // namespace

namespace {

std::string norm_to_string(channel::NormScheme scheme) {
  return scheme == channel::NormScheme::log1p ? "log1p" : "identity";
}

channel::NormScheme norm_from_string(const std::string& name) {
  if (name == "log1p") return channel::NormScheme::log1p;
  if (name == "identity") return channel::NormScheme::identity;
  throw FormatError("unknown normalization '" + name + "'");
}

nlohmann::json split_json(const SplitData& data) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& inst : data.instances) {
    out.push_back({{"seed", inst.seed()},
                   {"n", inst.n()},
                   {"noise_power", inst.noise_power()},
                   {"p_max", inst.p_max()},
                   {"gains", std::vector<double>(inst.gains().begin(), inst.gains().end())}});
  }
  return out;
}

SplitData split_from_json(const nlohmann::json& j, const channel::ChannelConfig& channel, channel::NormScheme norm) {
  SplitData data;
  for (const auto& row : j) {
    NetworkInstance inst(row.at("n").get<std::size_t>(), row.at("gains").get<std::vector<double>>(),
                         row.at("noise_power").get<double>(), row.at("p_max").get<double>(),
                         row.at("seed").get<std::uint64_t>());
    data.seeds.push_back(inst.seed());
    data.graphs.push_back(channel::normalize_features(channel::build_graph(inst, channel.sparsify_threshold), norm));
    data.instances.push_back(std::move(inst));
  }
  return data;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset) {
  const nlohmann::json j = {{"format", "wugnn-dataset"},
                            {"channel", channel_json(dataset.channel)},
                            {"base_seed", dataset.base_seed},
                            {"norm", norm_to_string(dataset.norm)},
                            {"train", split_json(dataset.train)},
                            {"val", split_json(dataset.val)},
                            {"test", split_json(dataset.test)}};
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open dataset file for writing");
  out << j.dump() << '\n';
  if (!out) throw IoError(path, "failed writing dataset file");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open dataset file");
  Dataset ds;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", std::string()) != "wugnn-dataset") throw FormatError("not a dataset file: " + path);
    ds.channel = channel_from_json(j.at("channel"));
    ds.base_seed = j.at("base_seed").get<std::uint64_t>();
    ds.norm = norm_from_string(j.at("norm").get<std::string>());
    ds.train = split_from_json(j.at("train"), ds.channel, ds.norm);
    ds.val = split_from_json(j.at("val"), ds.channel, ds.norm);
    ds.test = split_from_json(j.at("test"), ds.channel, ds.norm);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed dataset file (" + path + "): " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError("invalid instance in dataset file (" + path + "): " + e.what());
  }
  ds.counts = {ds.train.size(), ds.val.size(), ds.test.size()};
  return ds;
}

void save_trained(const std::string& path, const TrainedModel& trained) {
  diff::Checkpoint ckpt;
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : trained.curve) {
    nlohmann::json row = {{"epoch", p.epoch}, {"train_loss", p.train_loss}};
    row["val_mean_rate"] = p.val_mean_rate ? nlohmann::json(*p.val_mean_rate) : nlohmann::json(nullptr);
    curve.push_back(row);
  }
  ckpt.metadata = {{"format", "wugnn-model"},
                   {"model", trained.model.spec_json()},
                   {"trained_n", trained.trained_n},
                   {"channel", channel_json(trained.channel)},
                   {"best_epoch", trained.best_epoch},
                   {"best_val_rate", trained.best_val_rate},
                   {"initial_val_rate", trained.initial_val_rate},
                   {"curve", curve}};
  ckpt.params = trained.model.params;
  diff::save_checkpoint(path, ckpt);
}

TrainedModel load_trained(const std::string& path) {
  diff::Checkpoint ckpt = diff::load_checkpoint(path);
  TrainedModel trained;
  try {
    const auto& meta = ckpt.metadata;
    if (meta.value("format", std::string()) != "wugnn-model") throw FormatError("checkpoint is not a model checkpoint");
    const auto& m = meta.at("model");
    trained.model.kind = model::model_kind_from_string(m.at("kind").get<std::string>());
    if (trained.model.kind == model::ModelKind::wugnn) {
      trained.model.wugnn = model::wugnn_spec_from_json(m.at("spec"));
    } else {
      trained.model.baseline = model::baseline_spec_from_json(m.at("spec"));
    }
    trained.trained_n = meta.at("trained_n").get<std::size_t>();
    trained.channel = channel_from_json(meta.at("channel"));
    trained.best_epoch = meta.at("best_epoch").get<std::size_t>();
    trained.best_val_rate = meta.at("best_val_rate").get<double>();
    trained.initial_val_rate = meta.at("initial_val_rate").get<double>();
    for (const auto& row : meta.at("curve")) {
      CurvePoint p;
      p.epoch = row.at("epoch").get<std::size_t>();
      p.train_loss = row.at("train_loss").get<double>();
      if (!row.at("val_mean_rate").is_null()) p.val_mean_rate = row.at("val_mean_rate").get<double>();
      trained.curve.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint metadata incomplete (" + path + "): " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("checkpoint metadata invalid (" + path + "): " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError("checkpoint metadata invalid (" + path + "): " + e.what());
  }

  // Parameter names and shapes must be exactly those the spec creates.
  const diff::ModelParams reference = trained.model.kind == model::ModelKind::wugnn
                                          ? model::init_wugnn(trained.model.wugnn, 0)
                                          : model::init_gnn_baseline(trained.model.baseline, 0);
  if (reference.size() != ckpt.params.size()) {
    throw FormatError("checkpoint has " + std::to_string(ckpt.params.size()) + " parameters, spec expects " +
                      std::to_string(reference.size()) + " (" + path + ")");
  }
  for (const auto& [name, t] : reference) {
    if (!ckpt.params.contains(name)) throw FormatError("checkpoint lacks parameter '" + name + "' (" + path + ")");
    if (ckpt.params.get(name).shape() != t.shape()) {
      throw FormatError("checkpoint parameter '" + name + "' has shape " +
                        diff::shape_string(ckpt.params.get(name).shape()) + ", spec expects " +
                        diff::shape_string(t.shape()) + " (" + path + ")");
    }
  }
  trained.model.params = std::move(ckpt.params);
  return trained;
}

EvalReport evaluate(const model::Model& model, const SplitData& data, const wmmse::WmmseSettings& settings) {
  if (data.size() == 0) throw ArgumentError("evaluate: split is empty");
  using clock = std::chrono::steady_clock;
  EvalReport report;
  report.n = data.instances.front().n();
  report.instance_count = data.size();
  double model_time = 0.0, wmmse_time = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const NetworkInstance& inst = data.instances[k];
    auto t0 = clock::now();
    Tape tape = Tape::no_grad();
    const Tensor v = model.forward(tape, model::make_batch(inst, data.graphs[k], model.needs_edge_features()));
    auto t1 = clock::now();
    report.model_rates.push_back(wmmse::sum_rate(inst, v.data()));
    auto t2 = clock::now();
    const auto trace = wmmse::run_wmmse(inst, wmmse::full_power(inst), settings);
    auto t3 = clock::now();
    report.wmmse_rates.push_back(trace.final_sum_rate());
    model_time += std::chrono::duration<double>(t1 - t0).count();
    wmmse_time += std::chrono::duration<double>(t3 - t2).count();
  }
  const double count = static_cast<double>(data.size());
  report.model_mean = std::accumulate(report.model_rates.begin(), report.model_rates.end(), 0.0) / count;
  report.wmmse_mean = std::accumulate(report.wmmse_rates.begin(), report.wmmse_rates.end(), 0.0) / count;
  report.ratio = report.model_mean / report.wmmse_mean;
  report.model_seconds_mean = model_time / count;
  report.wmmse_seconds_mean = wmmse_time / count;
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"n", r.n},
          {"instance_count", r.instance_count},
          {"model_rates", r.model_rates},
          {"wmmse_rates", r.wmmse_rates},
          {"model_mean", r.model_mean},
          {"wmmse_mean", r.wmmse_mean},
          {"ratio", r.ratio},
          {"model_seconds_mean", r.model_seconds_mean},
          {"wmmse_seconds_mean", r.wmmse_seconds_mean}};
}

}  // namespace wugnn::train
