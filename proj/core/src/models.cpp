#include "wugnn/models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "wugnn/errors.hpp"

namespace wugnn::model {

using channel::InterferenceGraph;
using channel::NetworkInstance;

namespace {

constexpr std::size_t kFeat = InterferenceGraph::kNodeFeatureDim;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_graph_matches(const NetworkInstance& instance, const InterferenceGraph& graph) {
  if (graph.n != instance.n()) {
    std::ostringstream oss;
    oss << "graph has " << graph.n << " nodes but instance has n = " << instance.n();
    throw ArgumentError(oss.str());
  }
  if (graph.node_features.size() != graph.n * kFeat || graph.src.size() != graph.dst.size() ||
      graph.edge_features.size() != graph.src.size()) {
    throw ArgumentError("malformed interference graph");
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (graph.src[e] >= graph.n || graph.dst[e] >= graph.n) throw ArgumentError("graph edge index out of range");
  }
}

std::vector<std::size_t> widths_with_hidden(std::size_t in, std::size_t hidden, std::size_t out) {
  return {in, hidden, out};
}

}  // namespace

GraphBatch make_batch(std::span<const NetworkInstance* const> instances,
                      std::span<const InterferenceGraph* const> graphs, bool with_edges) {
  if (instances.size() != graphs.size() || instances.empty()) {
    throw ArgumentError("make_batch needs one graph per instance and at least one instance");
  }
  GraphBatch batch;
  std::size_t total_nodes = 0, total_edges = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    check_graph_matches(*instances[k], *graphs[k]);
    total_nodes += graphs[k]->n;
    total_edges += graphs[k]->num_edges();
  }
  batch.num_nodes = total_nodes;
  std::vector<double> feats, vmax, efeat, rfeat;
  feats.reserve(total_nodes * kFeat);
  vmax.reserve(total_nodes);
  batch.gain_blocks.reserve(instances.size());
  if (with_edges) {
    batch.src.reserve(total_edges);
    batch.dst.reserve(total_edges);
    efeat.reserve(total_edges);
    rfeat.reserve(total_edges);
  }

  std::size_t offset = 0;
  std::vector<std::size_t> edge_of;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const NetworkInstance& inst = *instances[k];
    const InterferenceGraph& g = *graphs[k];
    const std::size_t n = g.n;
    batch.graph_offsets.push_back(offset);
    feats.insert(feats.end(), g.node_features.begin(), g.node_features.end());
    vmax.insert(vmax.end(), n, inst.v_max());

    std::vector<double> block(n * n, 0.0);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const std::size_t s = g.src[e], d = g.dst[e];
      block[d * n + s] = inst.power_gain(d, s);
    }
    batch.gain_blocks.emplace_back(diff::Shape{n, n}, std::move(block));

    if (with_edges) {
      edge_of.assign(n * n, kNone);
      for (std::size_t e = 0; e < g.num_edges(); ++e) edge_of[g.dst[e] * n + g.src[e]] = e;
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        batch.src.push_back(offset + g.src[e]);
        batch.dst.push_back(offset + g.dst[e]);
        efeat.push_back(g.edge_features[e]);
        const std::size_t rev = edge_of[g.src[e] * n + g.dst[e]];
        rfeat.push_back(rev == kNone ? 0.0 : g.edge_features[rev]);
      }
    }
    offset += n;
  }
  batch.graph_offsets.push_back(offset);
  batch.node_features = Tensor({total_nodes, kFeat}, std::move(feats));
  batch.v_max = Tensor({total_nodes, 1}, std::move(vmax));
  if (with_edges) {
    batch.edge_features = Tensor({total_edges, 1}, std::move(efeat));
    batch.reverse_features = Tensor({total_edges, 1}, std::move(rfeat));
  }
  return batch;
}

GraphBatch make_batch(const NetworkInstance& instance, const InterferenceGraph& graph, bool with_edges) {
  const NetworkInstance* i = &instance;
  const InterferenceGraph* g = &graph;
  return make_batch(std::span<const NetworkInstance* const>(&i, 1), std::span<const InterferenceGraph* const>(&g, 1),
                    with_edges);
}

RateTerms make_rate_terms(std::span<const NetworkInstance* const> instances) {
  RateTerms terms;
  std::vector<double> direct, noise;
  std::size_t offset = 0;
  for (const NetworkInstance* inst : instances) {
    const std::size_t n = inst->n();
    terms.offsets.push_back(offset);
    std::vector<double> cross(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      direct.push_back(inst->power_gain(i, i));
      noise.push_back(inst->noise_power());
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) cross[i * n + j] = inst->power_gain(i, j);
      }
    }
    terms.cross_power_gain.emplace_back(diff::Shape{n, n}, std::move(cross));
    offset += n;
  }
  terms.offsets.push_back(offset);
  terms.num_nodes = offset;
  terms.direct_power_gain = Tensor({offset, 1}, std::move(direct));
  terms.noise_power = Tensor({offset, 1}, std::move(noise));
  return terms;
}

Tensor node_rates(Tape& tape, const RateTerms& terms, const Tensor& v) {
  if (v.rows() != terms.num_nodes || v.cols() != 1) {
    throw ArgumentError("node_rates: amplitudes have shape " + diff::shape_string(v.shape()) + ", expected [" +
                        std::to_string(terms.num_nodes) + ", 1]");
  }
  const Tensor power = diff::square(tape, v);
  const Tensor signal = diff::mul(tape, power, terms.direct_power_gain);
  const Tensor interference = diff::block_matmul(tape, terms.cross_power_gain, terms.offsets, power);
  const Tensor sinr = diff::div(tape, signal, diff::add(tape, interference, terms.noise_power));
  return diff::scale(tape, diff::log(tape, diff::add_scalar(tape, sinr, 1.0)), 1.0 / std::numbers::ln2);
}

Tensor project_power(Tape& tape, const Tensor& raw, const Tensor& v_max) {
  const Tensor s = diff::sigmoid(tape, raw);
  if (v_max.size() == s.size()) return diff::mul(tape, s, Tensor(s.shape(), std::vector<double>(v_max.data().begin(), v_max.data().end())));
  return diff::mul(tape, s, v_max);
}

wmmse::PowerVector project_power(std::span<const double> raw, double p_max) {
  Tape tape = Tape::no_grad();
  const Tensor out = project_power(tape, Tensor({raw.size()}, std::vector<double>(raw.begin(), raw.end())),
                                   Tensor::scalar(std::sqrt(p_max)));
  return wmmse::PowerVector{std::vector<double>(out.data().begin(), out.data().end())};
}

// ---------------------------------------------------------------------------
// WUGNN

WugnnSpec WugnnSpec::make(std::size_t k_layers, std::size_t hidden_dim, std::size_t mlp_hidden,
                          bool share_across_layers) {
  WugnnSpec spec;
  spec.k_layers = k_layers;
  spec.hidden_dim = hidden_dim;
  spec.share_across_layers = share_across_layers;
  const std::size_t h = hidden_dim;
  using diff::Activation;
  spec.gnn_u.message = MlpSpec::make(widths_with_hidden(h, mlp_hidden, h), Activation::relu, Activation::sigmoid);
  spec.gnn_u.combine =
      MlpSpec::make(widths_with_hidden(kFeat + 2 * h, mlp_hidden, h), Activation::relu, Activation::tanh);
  spec.mlp_w = MlpSpec::make(widths_with_hidden(kFeat + 2 * h, mlp_hidden, h), Activation::relu, Activation::tanh);
  spec.gnn_v.message = MlpSpec::make(widths_with_hidden(2 * h, mlp_hidden, h), Activation::relu, Activation::sigmoid);
  spec.gnn_v.combine = MlpSpec::make(widths_with_hidden(kFeat + 3 * h, mlp_hidden, h));
  spec.validate();
  return spec;
}

void WugnnSpec::validate() const {
  if (k_layers < 1) throw ArgumentError("WUGNN needs k_layers >= 1");
  if (hidden_dim < 1) throw ArgumentError("WUGNN needs hidden_dim >= 1");
  const std::size_t h = hidden_dim;
  auto check = [h](const MlpSpec& m, std::size_t in, const char* name) {
    m.validate();
    if (m.input_width() != in || m.output_width() != h) {
      std::ostringstream oss;
      oss << "WUGNN module " << name << " must map " << in << " -> " << h << ", spec maps " << m.input_width()
          << " -> " << m.output_width();
      throw ArgumentError(oss.str());
    }
  };
  for (const MlpSpec* m : {&gnn_u.message, &gnn_v.message}) {
    if (m->output_activation != diff::Activation::sigmoid && m->output_activation != diff::Activation::relu) {
      throw ArgumentError("WUGNN message MLPs need a nonnegative output activation (sigmoid or relu)");
    }
  }
  check(gnn_u.message, h, "gnn_u.message");
  check(gnn_u.combine, kFeat + 2 * h, "gnn_u.combine");
  check(mlp_w, kFeat + 2 * h, "mlp_w");
  check(gnn_v.message, 2 * h, "gnn_v.message");
  check(gnn_v.combine, kFeat + 3 * h, "gnn_v.combine");
}

std::size_t WugnnSpec::parameter_count() const {
  const std::size_t per_layer = gnn_u.message.parameter_count() + gnn_u.combine.parameter_count() +
                                mlp_w.parameter_count() + gnn_v.message.parameter_count() +
                                gnn_v.combine.parameter_count();
  return per_layer * (share_across_layers ? 1 : k_layers);
}

std::string layer_prefix(const WugnnSpec& spec, std::size_t k) {
  return spec.share_across_layers ? std::string("shared/") : "layer" + std::to_string(k) + "/";
}

ModelParams init_wugnn(const WugnnSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ModelParams params;
  const std::size_t distinct = spec.share_across_layers ? 1 : spec.k_layers;
  for (std::size_t k = 0; k < distinct; ++k) {
    const std::string p = layer_prefix(spec, k);
    diff::init_mlp(params, spec.gnn_u.message, p + "gnn_u/message/", rng);
    diff::init_mlp(params, spec.gnn_u.combine, p + "gnn_u/combine/", rng);
    diff::init_mlp(params, spec.mlp_w, p + "mlp_w/", rng);
    diff::init_mlp(params, spec.gnn_v.message, p + "gnn_v/message/", rng);
    diff::init_mlp(params, spec.gnn_v.combine, p + "gnn_v/combine/", rng);
  }
  return params;
}

LayerState initial_state(const WugnnSpec& spec, const GraphBatch& batch) {
  const std::size_t n = batch.num_nodes;
  const std::size_t h = spec.hidden_dim;
  std::vector<double> v(n * h, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * h] = batch.v_max.at(i);
  return LayerState{Tensor::zeros({n, h}), Tensor::zeros({n, h}), Tensor({n, h}, std::move(v))};
}

namespace {

void check_state(const WugnnSpec& spec, const GraphBatch& batch, const LayerState& state) {
  const diff::Shape expected{batch.num_nodes, spec.hidden_dim};
  for (const Tensor* t : {&state.u, &state.w, &state.v}) {
    if (!t->defined() || t->shape() != expected) {
      throw ArgumentError("layer state must be " + diff::shape_string(expected));
    }
  }
  if (batch.node_features.rows() != batch.num_nodes) throw ArgumentError("batch features do not match node count");
}

}  // namespace

namespace {

// Messages are nonnegative, so the gain-weighted sums are interference-like
// powers; log1p keeps them on one scale across network sizes.
Tensor compress(Tape& tape, const Tensor& aggregate) {
  return diff::log(tape, diff::add_scalar(tape, aggregate, 1.0));
}

}  // namespace

Tensor gnn_u_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state) {
  check_state(spec, batch, state);
  // The message MLP depends only on the sender, so it is evaluated once per
  // node and the edge gate is applied during aggregation.
  const Tensor messages = diff::mlp_forward(tape, params, spec.gnn_u.message, state.v, prefix + "gnn_u/message/");
  const Tensor aggregate = diff::block_matmul(tape, batch.gain_blocks, batch.graph_offsets, messages);
  const std::array<Tensor, 3> parts{batch.node_features, state.v, compress(tape, aggregate)};
  return diff::mlp_forward(tape, params, spec.gnn_u.combine, diff::concat_cols(tape, parts), prefix + "gnn_u/combine/");
}

Tensor mlp_w_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state) {
  check_state(spec, batch, state);
  const std::array<Tensor, 3> parts{batch.node_features, state.u, state.v};
  return diff::mlp_forward(tape, params, spec.mlp_w, diff::concat_cols(tape, parts), prefix + "mlp_w/");
}

Tensor gnn_v_step(Tape& tape, const ModelParams& params, const std::string& prefix, const WugnnSpec& spec,
                  const GraphBatch& batch, const LayerState& state) {
  check_state(spec, batch, state);
  const std::array<Tensor, 2> sender{state.u, state.w};
  const Tensor messages =
      diff::mlp_forward(tape, params, spec.gnn_v.message, diff::concat_cols(tape, sender), prefix + "gnn_v/message/");
  // Transposed blocks: node n hears from the receivers it interferes with.
  const Tensor aggregate = diff::block_matmul(tape, batch.gain_blocks, batch.graph_offsets, messages, true);
  const std::array<Tensor, 4> parts{batch.node_features, state.u, state.w, compress(tape, aggregate)};
  const Tensor raw =
      diff::mlp_forward(tape, params, spec.gnn_v.combine, diff::concat_cols(tape, parts), prefix + "gnn_v/combine/");
  const Tensor power = project_power(tape, diff::slice_cols(tape, raw, 0, 1), batch.v_max);
  if (spec.hidden_dim == 1) return power;
  const std::array<Tensor, 2> out{power, diff::tanh(tape, diff::slice_cols(tape, raw, 1, spec.hidden_dim))};
  return diff::concat_cols(tape, out);
}

Tensor wugnn_forward(Tape& tape, const ModelParams& params, const WugnnSpec& spec, const GraphBatch& batch) {
  spec.validate();
  LayerState state = initial_state(spec, batch);
  for (std::size_t k = 0; k < spec.k_layers; ++k) {
    const std::string prefix = layer_prefix(spec, k);
    state.u = gnn_u_step(tape, params, prefix, spec, batch, state);
    state.w = mlp_w_step(tape, params, prefix, spec, batch, state);
    state.v = gnn_v_step(tape, params, prefix, spec, batch, state);
  }
  return diff::slice_cols(tape, state.v, 0, 1);
}

wmmse::PowerVector wugnn_forward(const ModelParams& params, const WugnnSpec& spec, const InterferenceGraph& graph,
                                 const NetworkInstance& instance) {
  Tape tape = Tape::no_grad();
  const Tensor v = wugnn_forward(tape, params, spec, make_batch(instance, graph, false));
  return wmmse::PowerVector{std::vector<double>(v.data().begin(), v.data().end())};
}

// ---------------------------------------------------------------------------
// Baseline

GnnBaselineSpec GnnBaselineSpec::make(std::size_t rounds, std::size_t hidden_dim, std::size_t mlp_hidden) {
  GnnBaselineSpec spec;
  spec.rounds = rounds;
  spec.hidden_dim = hidden_dim;
  spec.message = MlpSpec::make(widths_with_hidden(hidden_dim + 2, mlp_hidden, hidden_dim));
  spec.update = MlpSpec::make(widths_with_hidden(kFeat + 2 * hidden_dim, mlp_hidden, hidden_dim), diff::Activation::relu,
                              diff::Activation::tanh);
  spec.readout = MlpSpec::make(widths_with_hidden(hidden_dim, mlp_hidden, 1));
  spec.validate();
  return spec;
}

GnnBaselineSpec GnnBaselineSpec::matched(std::size_t target_parameters, std::size_t rounds, std::size_t hidden_dim) {
  GnnBaselineSpec best = make(rounds, hidden_dim, 1);
  auto gap = [target_parameters](const GnnBaselineSpec& s) {
    const auto c = static_cast<long long>(s.parameter_count());
    return std::llabs(c - static_cast<long long>(target_parameters));
  };
  for (std::size_t width = 2; width <= 1024; ++width) {
    GnnBaselineSpec candidate = make(rounds, hidden_dim, width);
    if (gap(candidate) < gap(best)) best = candidate;
    if (candidate.parameter_count() > target_parameters) break;
  }
  return best;
}

void GnnBaselineSpec::validate() const {
  if (rounds < 1) throw ArgumentError("baseline GNN needs rounds >= 1");
  if (hidden_dim < 1) throw ArgumentError("baseline GNN needs hidden_dim >= 1");
  message.validate();
  update.validate();
  readout.validate();
  if (message.input_width() != hidden_dim + 2 || message.output_width() != hidden_dim) {
    throw ArgumentError("baseline message MLP must map hidden+2 -> hidden");
  }
  if (update.input_width() != kFeat + 2 * hidden_dim || update.output_width() != hidden_dim) {
    throw ArgumentError("baseline update MLP must map features+2*hidden -> hidden");
  }
  if (readout.input_width() != hidden_dim || readout.output_width() != 1) {
    throw ArgumentError("baseline readout MLP must map hidden -> 1");
  }
}

std::size_t GnnBaselineSpec::parameter_count() const {
  return message.parameter_count() + update.parameter_count() + readout.parameter_count();
}

ModelParams init_gnn_baseline(const GnnBaselineSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ModelParams params;
  diff::init_mlp(params, spec.message, "message/", rng);
  diff::init_mlp(params, spec.update, "update/", rng);
  diff::init_mlp(params, spec.readout, "readout/", rng);
  return params;
}

Tensor gnn_baseline_forward(Tape& tape, const ModelParams& params, const GnnBaselineSpec& spec,
                            const GraphBatch& batch) {
  spec.validate();
  if (!batch.edge_features.defined()) throw ArgumentError("baseline GNN needs a batch built with edge lists");
  const std::size_t n = batch.num_nodes;
  Tensor hidden = Tensor::zeros({n, spec.hidden_dim});
  for (std::size_t r = 0; r < spec.rounds; ++r) {
    const std::array<Tensor, 3> edge_in{diff::gather_rows(tape, hidden, batch.src), batch.edge_features,
                                        batch.reverse_features};
    const Tensor messages = diff::mlp_forward(tape, params, spec.message, diff::concat_cols(tape, edge_in), "message/");
    const Tensor aggregate = diff::scatter_add_rows(tape, messages, batch.dst, n);
    const std::array<Tensor, 3> node_in{batch.node_features, hidden, aggregate};
    hidden = diff::mlp_forward(tape, params, spec.update, diff::concat_cols(tape, node_in), "update/");
  }
  const Tensor raw = diff::mlp_forward(tape, params, spec.readout, hidden, "readout/");
  return project_power(tape, raw, batch.v_max);
}

wmmse::PowerVector gnn_baseline_forward(const ModelParams& params, const GnnBaselineSpec& spec,
                                        const InterferenceGraph& graph, const NetworkInstance& instance) {
  Tape tape = Tape::no_grad();
  const Tensor v = gnn_baseline_forward(tape, params, spec, make_batch(instance, graph));
  return wmmse::PowerVector{std::vector<double>(v.data().begin(), v.data().end())};
}

// ---------------------------------------------------------------------------
// Model

std::string to_string(ModelKind kind) { return kind == ModelKind::wugnn ? "wugnn" : "gnn_baseline"; }

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "wugnn") return ModelKind::wugnn;
  if (name == "gnn_baseline" || name == "gnn") return ModelKind::gnn_baseline;
  throw ConfigError("unknown model kind '" + name + "'");
}

Model Model::make_wugnn(const WugnnSpec& spec, std::uint64_t seed) {
  Model m;
  m.kind = ModelKind::wugnn;
  m.wugnn = spec;
  m.params = init_wugnn(spec, seed);
  return m;
}

Model Model::make_baseline(const GnnBaselineSpec& spec, std::uint64_t seed) {
  Model m;
  m.kind = ModelKind::gnn_baseline;
  m.baseline = spec;
  m.params = init_gnn_baseline(spec, seed);
  return m;
}

Tensor Model::forward(Tape& tape, const GraphBatch& batch) const {
  return kind == ModelKind::wugnn ? wugnn_forward(tape, params, wugnn, batch)
                                  : gnn_baseline_forward(tape, params, baseline, batch);
}

bool Model::needs_edge_features() const { return kind == ModelKind::gnn_baseline; }

wmmse::PowerVector Model::allocate(const NetworkInstance& instance, channel::NormScheme scheme) const {
  const bool edges = needs_edge_features();
  const InterferenceGraph graph = channel::normalize_features(
      channel::build_graph(instance), scheme, edges ? channel::FeatureScope::all : channel::FeatureScope::nodes_only);
  Tape tape = Tape::no_grad();
  const Tensor v = forward(tape, make_batch(instance, graph, edges));
  return wmmse::PowerVector{std::vector<double>(v.data().begin(), v.data().end())};
}

nlohmann::json Model::spec_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["spec"] = kind == ModelKind::wugnn ? to_json(wugnn) : to_json(baseline);
  return j;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const MlpSpec& spec) {
  nlohmann::json acts = nlohmann::json::array();
  for (auto a : spec.hidden_activations) acts.push_back(diff::to_string(a));
  return {{"layer_widths", spec.layer_widths},
          {"hidden_activations", acts},
          {"output_activation", diff::to_string(spec.output_activation)}};
}

MlpSpec mlp_spec_from_json(const nlohmann::json& j) {
  try {
    MlpSpec spec;
    spec.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("hidden_activations")) spec.hidden_activations.push_back(diff::activation_from_string(a.get<std::string>()));
    spec.output_activation = diff::activation_from_string(j.at("output_activation").get<std::string>());
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad MLP spec: ") + e.what());
  }
}

nlohmann::json to_json(const WugnnSpec& spec) {
  return {{"k_layers", spec.k_layers},
          {"hidden_dim", spec.hidden_dim},
          {"share_across_layers", spec.share_across_layers},
          {"gnn_u", {{"message", to_json(spec.gnn_u.message)}, {"combine", to_json(spec.gnn_u.combine)}}},
          {"mlp_w", to_json(spec.mlp_w)},
          {"gnn_v", {{"message", to_json(spec.gnn_v.message)}, {"combine", to_json(spec.gnn_v.combine)}}}};
}

WugnnSpec wugnn_spec_from_json(const nlohmann::json& j) {
  try {
    WugnnSpec spec;
    spec.k_layers = j.at("k_layers").get<std::size_t>();
    spec.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    spec.share_across_layers = j.at("share_across_layers").get<bool>();
    spec.gnn_u.message = mlp_spec_from_json(j.at("gnn_u").at("message"));
    spec.gnn_u.combine = mlp_spec_from_json(j.at("gnn_u").at("combine"));
    spec.mlp_w = mlp_spec_from_json(j.at("mlp_w"));
    spec.gnn_v.message = mlp_spec_from_json(j.at("gnn_v").at("message"));
    spec.gnn_v.combine = mlp_spec_from_json(j.at("gnn_v").at("combine"));
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad WUGNN spec: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("inconsistent WUGNN spec: ") + e.what());
  }
}

nlohmann::json to_json(const GnnBaselineSpec& spec) {
  return {{"rounds", spec.rounds},
          {"hidden_dim", spec.hidden_dim},
          {"message", to_json(spec.message)},
          {"update", to_json(spec.update)},
          {"readout", to_json(spec.readout)}};
}

GnnBaselineSpec baseline_spec_from_json(const nlohmann::json& j) {
  try {
    GnnBaselineSpec spec;
    spec.rounds = j.at("rounds").get<std::size_t>();
    spec.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    spec.message = mlp_spec_from_json(j.at("message"));
    spec.update = mlp_spec_from_json(j.at("update"));
    spec.readout = mlp_spec_from_json(j.at("readout"));
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad baseline spec: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("inconsistent baseline spec: ") + e.what());
  }
}

}  // namespace wugnn::model
