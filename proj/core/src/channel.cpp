#include "wugnn/channel.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "wugnn/errors.hpp"

namespace wugnn::channel {

std::string to_string(FadingModel model) {
  switch (model) {
    case FadingModel::rayleigh:
      return "rayleigh";
  }
  return "unknown";
}

FadingModel fading_model_from_string(const std::string& name) {
  if (name == "rayleigh") return FadingModel::rayleigh;
  throw ConfigError("unknown fading model '" + name + "'");
}

void ChannelConfig::validate() const {
  std::ostringstream err;
  if (n < 1) err << "n must be >= 1; ";
  if (!(noise_power > 0.0)) err << "noise_power must be > 0; ";
  if (!(p_max > 0.0)) err << "p_max must be > 0; ";
  if (!(sparsify_threshold >= 0.0)) err << "sparsify_threshold must be >= 0; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError("invalid channel config: " + msg);
}

NetworkInstance::NetworkInstance(std::size_t n, std::vector<double> gains, double noise_power,
                                 double p_max, std::uint64_t seed)
    : n_(n), gains_(std::move(gains)), noise_power_(noise_power), p_max_(p_max), seed_(seed) {
  if (n_ < 1) throw ArgumentError("instance needs n >= 1");
  if (gains_.size() != n_ * n_) {
    std::ostringstream oss;
    oss << "gain matrix has " << gains_.size() << " entries, expected " << n_ * n_;
    throw ArgumentError(oss.str());
  }
  if (!(noise_power_ > 0.0) || !(p_max_ > 0.0)) {
    throw ArgumentError("instance needs noise_power > 0 and p_max > 0");
  }
  for (double g : gains_) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ArgumentError("gains must be finite and >= 0");
  }
}

double NetworkInstance::v_max() const noexcept { return std::sqrt(p_max_); }

NetworkInstance generate_instance(const ChannelConfig& config) {
  config.validate();
  const std::size_t n = config.n;
  std::vector<double> gains(n * n);
  std::mt19937_64 rng(config.seed);
  switch (config.fading_model) {
    case FadingModel::rayleigh: {
      std::normal_distribution<double> component(0.0, std::sqrt(0.5));
      for (double& g : gains) {
        const double re = component(rng);
        const double im = component(rng);
        g = std::hypot(re, im);
      }
      break;
    }
  }
  return NetworkInstance(n, std::move(gains), config.noise_power, config.p_max, config.seed);
}

NetworkInstance permute_instance(const NetworkInstance& instance, std::span<const std::size_t> perm) {
  const std::size_t n = instance.n();
  if (perm.size() != n) throw ArgumentError("permutation length does not match instance size");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw ArgumentError("not a permutation");
    seen[p] = true;
  }
  std::vector<double> gains(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) gains[perm[i] * n + perm[j]] = instance.gain(i, j);
  }
  return NetworkInstance(n, std::move(gains), instance.noise_power(), instance.p_max(), instance.seed());
}

InterferenceGraph build_graph(const NetworkInstance& instance, double sparsify_threshold) {
  const std::size_t n = instance.n();
  InterferenceGraph graph;
  graph.n = n;
  graph.node_features.resize(n * InterferenceGraph::kNodeFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &graph.node_features[i * InterferenceGraph::kNodeFeatureDim];
    row[0] = instance.gain(i, i);
    row[1] = instance.noise_power();
    row[2] = instance.p_max();
  }
  const std::size_t max_edges = n * (n - 1);
  graph.src.reserve(max_edges);
  graph.dst.reserve(max_edges);
  graph.edge_features.reserve(max_edges);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double g = instance.gain(i, j);
      if (sparsify_threshold > 0.0 && g < sparsify_threshold) continue;
      graph.dst.push_back(i);
      graph.src.push_back(j);
      graph.edge_features.push_back(g);
    }
  }
  return graph;
}

InterferenceGraph normalize_features(InterferenceGraph graph, NormScheme scheme, FeatureScope scope) {
  if (scheme == NormScheme::identity) return graph;
  for (std::size_t i = 0; i < graph.n; ++i) {
    double& g = graph.node_features[i * InterferenceGraph::kNodeFeatureDim];
    g = std::log1p(g);
  }
  if (scope == FeatureScope::nodes_only) return graph;
  for (double& g : graph.edge_features) g = std::log1p(g);
  return graph;
}

}  // namespace wugnn::channel
