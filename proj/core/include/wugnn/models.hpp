#pragma once

// Learned power allocators over interference graphs.
//
// Both models run on a GraphBatch, the disjoint union of one or more
// (instance, graph) pairs, so training batches and single-instance inference
// share one code path. Parameters are shared across nodes, which gives
// permutation equivariance and lets a model trained at one network size run
// at any other.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wugnn/channel.hpp"
#include "wugnn/mlp.hpp"
#include "wugnn/tensor.hpp"
#include "wugnn/wmmse.hpp"

namespace wugnn::model {

using diff::Tensor;
using diff::Tape;
using diff::ModelParams;
using diff::MlpSpec;

struct GraphBatch {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> graph_offsets;  // node offset of each graph, plus a final total

  Tensor node_features;  // [N, kNodeFeatureDim], taken from the (normalized) graphs
  Tensor v_max;          // [N, 1], sqrt(p_max) per node

  // Per graph, entry (i, j) is h[i][j]^2 when the graph has the edge j -> i
  // and 0 otherwise, so sparsified edges drop out of every aggregation.
  std::vector<Tensor> gain_blocks;

  // Edge lists and features, only filled when requested; the WUGNN works
  // from gain_blocks alone.
  std::vector<std::size_t> src;  // interference from src[e] into dst[e]
  std::vector<std::size_t> dst;
  Tensor edge_features;     // [E, 1], graph edge features
  Tensor reverse_features;  // [E, 1], feature of the opposite edge, 0 if absent

  std::size_t num_graphs() const { return gain_blocks.size(); }
  std::size_t num_edges() const { return src.size(); }
};

/// Stacks graphs with node indices offset; graphs[k] must be built from
/// instances[k].
GraphBatch make_batch(std::span<const channel::NetworkInstance* const> instances,
                      std::span<const channel::InterferenceGraph* const> graphs, bool with_edges = true);
GraphBatch make_batch(const channel::NetworkInstance& instance, const channel::InterferenceGraph& graph,
                      bool with_edges = true);

/// Everything the Shannon sum rate needs, over the full interference pattern
/// of every instance regardless of graph sparsification.
struct RateTerms {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> offsets;
  std::vector<Tensor> cross_power_gain;  // per instance [n, n], zero diagonal
  Tensor direct_power_gain;              // [N, 1]
  Tensor noise_power;                    // [N, 1]
};

RateTerms make_rate_terms(std::span<const channel::NetworkInstance* const> instances);

/// Per-node rate log2(1 + SINR) for amplitudes v [N, 1], recorded on tape.
Tensor node_rates(Tape& tape, const RateTerms& terms, const Tensor& v);

/// v = v_max * sigmoid(raw), elementwise; v_max broadcasts if it has one element.
Tensor project_power(Tape& tape, const Tensor& raw, const Tensor& v_max);
wmmse::PowerVector project_power(std::span<const double> raw, double p_max);

// ---------------------------------------------------------------------------
// WMMSE-unrolled GNN

struct GnnModuleSpec {
  MlpSpec message;
  MlpSpec combine;
  bool operator==(const GnnModuleSpec&) const = default;
};

struct WugnnSpec {
  std::size_t k_layers = 3;
  std::size_t hidden_dim = 8;
  bool share_across_layers = false;
  GnnModuleSpec gnn_u;
  MlpSpec mlp_w;
  GnnModuleSpec gnn_v;

  /// Consistent module specs with one hidden layer of `mlp_hidden` units (relu).
  static WugnnSpec make(std::size_t k_layers = 3, std::size_t hidden_dim = 8, std::size_t mlp_hidden = 16,
                        bool share_across_layers = false);
  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const WugnnSpec&) const = default;
};

/// Per-node states, each [N, hidden_dim]; column 0 is the scalar estimate.
struct LayerState {
  Tensor u;
  Tensor w;
  Tensor v;
};

ModelParams init_wugnn(const WugnnSpec& spec, std::uint64_t seed);

/// v column 0 = v_max, everything else zero.
LayerState initial_state(const WugnnSpec& spec, const GraphBatch& batch);

/// Parameter name prefix of layer k ("layer{k}/" or "shared/").
std::string layer_prefix(const WugnnSpec& spec, std::size_t k);

/// Messages from each neighbor's v state, gated by the interference power
/// gain on the edge and summed over incoming edges; combined with the node's
/// own features and v state.
Tensor gnn_u_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state);
/// Purely local: own features, u state and v state.
Tensor mlp_w_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state);
/// Messages from each neighbor's (u, w) states along outgoing edges, i.e. from
/// the receivers this node interferes with. Column 0 of the result is
/// projected to [0, v_max].
Tensor gnn_v_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state);

/// Amplitudes [N, 1] after k_layers unrolled iterations.
Tensor wugnn_forward(Tape& tape, const ModelParams& params, const WugnnSpec& spec, const GraphBatch& batch);
wmmse::PowerVector wugnn_forward(const ModelParams& params, const WugnnSpec& spec,
                                 const channel::InterferenceGraph& graph, const channel::NetworkInstance& instance);

// ---------------------------------------------------------------------------
// Generic message-passing baseline

struct GnnBaselineSpec {
  std::size_t rounds = 3;
  std::size_t hidden_dim = 8;
  MlpSpec message;  // (neighbor hidden, edge feature, reverse edge feature) -> hidden
  MlpSpec update;   // (own features, own hidden, aggregate) -> hidden
  MlpSpec readout;  // hidden -> 1

  static GnnBaselineSpec make(std::size_t rounds = 3, std::size_t hidden_dim = 8, std::size_t mlp_hidden = 16);
  /// Picks the MLP width whose parameter count is closest to `target`.
  static GnnBaselineSpec matched(std::size_t target_parameters, std::size_t rounds = 3, std::size_t hidden_dim = 8);
  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const GnnBaselineSpec&) const = default;
};

ModelParams init_gnn_baseline(const GnnBaselineSpec& spec, std::uint64_t seed);

Tensor gnn_baseline_forward(Tape& tape, const ModelParams& params, const GnnBaselineSpec& spec,
                            const GraphBatch& batch);
wmmse::PowerVector gnn_baseline_forward(const ModelParams& params, const GnnBaselineSpec& spec,
                                        const channel::InterferenceGraph& graph,
                                        const channel::NetworkInstance& instance);

// ---------------------------------------------------------------------------
// Either model behind one interface.

enum class ModelKind { wugnn, gnn_baseline };
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct Model {
  ModelKind kind = ModelKind::wugnn;
  WugnnSpec wugnn;
  GnnBaselineSpec baseline;
  ModelParams params;

  static Model make_wugnn(const WugnnSpec& spec, std::uint64_t seed);
  static Model make_baseline(const GnnBaselineSpec& spec, std::uint64_t seed);

  Tensor forward(Tape& tape, const GraphBatch& batch) const;
  /// False for the WUGNN, which only reads the gain blocks.
  bool needs_edge_features() const;
  wmmse::PowerVector allocate(const channel::NetworkInstance& instance,
                              channel::NormScheme scheme = channel::NormScheme::log1p) const;
  nlohmann::json spec_json() const;
};

nlohmann::json to_json(const MlpSpec& spec);
MlpSpec mlp_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WugnnSpec& spec);
WugnnSpec wugnn_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GnnBaselineSpec& spec);
GnnBaselineSpec baseline_spec_from_json(const nlohmann::json& j);

}  // namespace wugnn::model
