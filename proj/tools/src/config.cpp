#include "wugnn_tools/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wugnn/errors.hpp"

namespace wugnn::tools {

namespace {

// Reads typed keys from one mapping and rejects any key it was not asked for.
class Section {
 public:
  Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError("section '" + name_ + "' must be a mapping");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("bad value for " + qualified(key) + " at line " + std::to_string(v.Mark().line + 1));
    }
  }

  Section sub(const std::string& key) {
    known_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), qualified(key));
  }

  YAML::Node raw(const std::string& key) {
    known_.insert(key);
    return node_ && node_.IsMap() ? node_[key] : YAML::Node();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.contains(key)) {
        throw ConfigError("unknown key '" + qualified(key) + "' at line " +
                          std::to_string(kv.first.Mark().line + 1));
      }
    }
  }

 private:
  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  YAML::Node node_;
  std::string name_;
  std::set<std::string> known_;
};

}  // namespace

void AppConfig::finalize() {
  train.wugnn = model::WugnnSpec::make(model.k_layers, model.hidden_dim, model.mlp_hidden, model.share_across_layers);
  train.baseline = baseline_mlp_hidden
                       ? model::GnnBaselineSpec::make(model.rounds, model.baseline_hidden_dim, *baseline_mlp_hidden)
                       : model::GnnBaselineSpec::matched(train.wugnn.parameter_count(), model.rounds,
                                                         model.baseline_hidden_dim);
}

bench::ScalabilitySettings AppConfig::scalability(std::size_t threads) const {
  bench::ScalabilitySettings s;
  s.sizes = bench.sizes;
  s.trials_per_size = bench.trials_per_size;
  s.seed = bench.seed;
  s.noise_power = train.channel.noise_power;
  s.p_max = train.channel.p_max;
  s.wmmse = wmmse;
  s.threads = threads;
  return s;
}

bench::TimingSettings AppConfig::timing(std::size_t threads) const {
  bench::TimingSettings s;
  s.sizes = bench.sizes;
  s.repetitions = bench.repetitions;
  s.warmup = bench.warmup;
  s.seed = bench.seed;
  s.noise_power = train.channel.noise_power;
  s.p_max = train.channel.p_max;
  s.wmmse = wmmse;
  s.threads = threads;
  return s;
}

nlohmann::json AppConfig::to_json() const {
  const auto& c = train.channel;
  nlohmann::json baseline_hidden = baseline_mlp_hidden ? nlohmann::json(*baseline_mlp_hidden) : nlohmann::json("matched");
  return {{"channel",
           {{"n", c.n},
            {"seed", c.seed},
            {"noise_power", c.noise_power},
            {"p_max", c.p_max},
            {"fading_model", channel::to_string(c.fading_model)},
            {"sparsify_threshold", c.sparsify_threshold}}},
          {"model",
           {{"kind", model::to_string(train.kind)},
            {"wugnn",
             {{"k_layers", model.k_layers},
              {"hidden_dim", model.hidden_dim},
              {"mlp_hidden", model.mlp_hidden},
              {"share_across_layers", model.share_across_layers}}},
            {"gnn_baseline",
             {{"rounds", model.rounds}, {"hidden_dim", model.baseline_hidden_dim}, {"mlp_hidden", baseline_hidden}}}}},
          {"train",
           {{"train_count", train.counts.train},
            {"val_count", train.counts.val},
            {"test_count", train.counts.test},
            {"epochs", train.epochs},
            {"batch_size", train.batch_size},
            {"lr", train.lr},
            {"beta1", train.beta1},
            {"beta2", train.beta2},
            {"eps", train.eps},
            {"lr_decay_every", train.lr_decay_every},
            {"lr_decay_factor", train.lr_decay_factor},
            {"eval_every", train.eval_every},
            {"seed", train.seed}}},
          {"wmmse", {{"tol", wmmse.tol}, {"max_iter", wmmse.max_iter}}},
          {"bench",
           {{"sizes", bench.sizes},
            {"trials_per_size", bench.trials_per_size},
            {"repetitions", bench.repetitions},
            {"warmup", bench.warmup},
            {"seed", bench.seed}}}};
}

AppConfig default_config() {
  AppConfig config;
  config.finalize();
  return config;
}

AppConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  AppConfig config;
  Section top(root, "");

  Section ch = top.sub("channel");
  auto& c = config.train.channel;
  ch.read("n", c.n);
  ch.read("seed", c.seed);
  ch.read("noise_power", c.noise_power);
  ch.read("p_max", c.p_max);
  std::string fading = channel::to_string(c.fading_model);
  ch.read("fading_model", fading);
  c.fading_model = channel::fading_model_from_string(fading);
  ch.read("sparsify_threshold", c.sparsify_threshold);
  ch.finish();

  Section md = top.sub("model");
  std::string kind = model::to_string(config.train.kind);
  md.read("kind", kind);
  config.train.kind = model::model_kind_from_string(kind);
  Section wu = md.sub("wugnn");
  wu.read("k_layers", config.model.k_layers);
  wu.read("hidden_dim", config.model.hidden_dim);
  wu.read("mlp_hidden", config.model.mlp_hidden);
  wu.read("share_across_layers", config.model.share_across_layers);
  wu.finish();
  Section gb = md.sub("gnn_baseline");
  gb.read("rounds", config.model.rounds);
  gb.read("hidden_dim", config.model.baseline_hidden_dim);
  if (const YAML::Node width = gb.raw("mlp_hidden"); width && !width.IsNull()) {
    if (width.IsScalar() && width.Scalar() == "matched") {
      config.baseline_mlp_hidden.reset();
    } else {
      std::size_t w = 0;
      gb.read("mlp_hidden", w);
      config.baseline_mlp_hidden = w;
    }
  }
  gb.finish();
  md.finish();

  Section tr = top.sub("train");
  auto& t = config.train;
  tr.read("train_count", t.counts.train);
  tr.read("val_count", t.counts.val);
  tr.read("test_count", t.counts.test);
  tr.read("epochs", t.epochs);
  tr.read("batch_size", t.batch_size);
  tr.read("lr", t.lr);
  tr.read("beta1", t.beta1);
  tr.read("beta2", t.beta2);
  tr.read("eps", t.eps);
  tr.read("lr_decay_every", t.lr_decay_every);
  tr.read("lr_decay_factor", t.lr_decay_factor);
  tr.read("eval_every", t.eval_every);
  tr.read("seed", t.seed);
  tr.finish();

  Section wm = top.sub("wmmse");
  wm.read("tol", config.wmmse.tol);
  wm.read("max_iter", config.wmmse.max_iter);
  wm.finish();

  Section be = top.sub("bench");
  be.read("sizes", config.bench.sizes);
  be.read("trials_per_size", config.bench.trials_per_size);
  be.read("repetitions", config.bench.repetitions);
  be.read("warmup", config.bench.warmup);
  be.read("seed", config.bench.seed);
  be.finish();

  top.finish();

  try {
    config.finalize();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid model dimensions: ") + e.what());
  }
  config.train.validate();
  if (!(config.wmmse.tol > 0.0)) throw ConfigError("wmmse.tol must be > 0");
  if (config.wmmse.max_iter < 1) throw ConfigError("wmmse.max_iter must be >= 1");
  if (config.bench.sizes.empty()) throw ConfigError("bench.sizes must be nonempty");
  for (std::size_t n : config.bench.sizes) {
    if (n < 1) throw ConfigError("bench.sizes entries must be >= 1");
  }
  if (config.bench.trials_per_size < 1) throw ConfigError("bench.trials_per_size must be >= 1");
  if (config.bench.repetitions < 5) throw ConfigError("bench.repetitions must be >= 5");
  if (config.bench.warmup < 1) throw ConfigError("bench.warmup must be >= 1");
  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot read config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_seed(AppConfig& config, std::uint64_t seed) {
  config.train.channel.seed = seed;
  config.train.seed = seed;
  config.bench.seed = seed;
}

}  // namespace wugnn::tools
