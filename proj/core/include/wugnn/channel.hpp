#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wugnn::channel {

enum class FadingModel {
  /// Each amplitude is |z| with z standard complex Gaussian, so E[h^2] = 1.
  rayleigh,
};

std::string to_string(FadingModel model);
FadingModel fading_model_from_string(const std::string& name);

struct ChannelConfig {
  std::size_t n = 10;
  std::uint64_t seed = 0;
  double noise_power = 1.0;
  double p_max = 1.0;
  FadingModel fading_model = FadingModel::rayleigh;
  /// Interference links with amplitude below this are dropped from the graph.
  /// Zero keeps the graph fully connected.
  double sparsify_threshold = 0.0;

  void validate() const;
};

/// One D2D scenario. gain(i, j) is the amplitude from transmitter j to
/// receiver i.
class NetworkInstance {
 public:
  NetworkInstance() = default;
  NetworkInstance(std::size_t n, std::vector<double> gains, double noise_power, double p_max,
                  std::uint64_t seed = 0);

  std::size_t n() const noexcept { return n_; }
  double gain(std::size_t rx, std::size_t tx) const noexcept { return gains_[rx * n_ + tx]; }
  double power_gain(std::size_t rx, std::size_t tx) const noexcept {
    const double g = gain(rx, tx);
    return g * g;
  }
  std::span<const double> gains() const noexcept { return gains_; }
  double noise_power() const noexcept { return noise_power_; }
  double p_max() const noexcept { return p_max_; }
  double v_max() const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }

  bool operator==(const NetworkInstance&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> gains_;
  double noise_power_ = 1.0;
  double p_max_ = 1.0;
  std::uint64_t seed_ = 0;
};

NetworkInstance generate_instance(const ChannelConfig& config);

/// Relabels nodes: old node i becomes node perm[i].
NetworkInstance permute_instance(const NetworkInstance& instance, std::span<const std::size_t> perm);

enum class NormScheme { identity, log1p };

/// Node/edge view of an instance. Edge e carries interference from node
/// src[e] (transmitter) into node dst[e] (receiver).
struct InterferenceGraph {
  static constexpr std::size_t kNodeFeatureDim = 3;  // direct gain, noise power, p_max

  std::size_t n = 0;
  std::vector<double> node_features;  // n x kNodeFeatureDim, row-major
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::vector<double> edge_features;  // one gain per edge

  std::size_t num_edges() const noexcept { return src.size(); }
  double direct_gain_feature(std::size_t node) const { return node_features[node * kNodeFeatureDim]; }
};

InterferenceGraph build_graph(const NetworkInstance& instance, double sparsify_threshold = 0.0);

enum class FeatureScope { all, nodes_only };

InterferenceGraph normalize_features(InterferenceGraph graph, NormScheme scheme = NormScheme::log1p,
                                     FeatureScope scope = FeatureScope::all);

}  // namespace wugnn::channel
