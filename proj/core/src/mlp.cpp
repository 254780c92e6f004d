#include "wugnn/mlp.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "wugnn/errors.hpp"

namespace wugnn::diff {

std::string to_string(Activation act) {
  switch (act) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::identity:
      return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

Tensor apply_activation(Tape& tape, const Tensor& x, Activation act) {
  switch (act) {
    case Activation::relu:
      return relu(tape, x);
    case Activation::tanh:
      return tanh(tape, x);
    case Activation::sigmoid:
      return sigmoid(tape, x);
    case Activation::identity:
      return x;
  }
  return x;
}

MlpSpec MlpSpec::make(std::vector<std::size_t> widths, Activation hidden, Activation output) {
  MlpSpec spec;
  spec.layer_widths = std::move(widths);
  if (spec.layer_widths.size() >= 2) spec.hidden_activations.assign(spec.layer_widths.size() - 2, hidden);
  spec.output_activation = output;
  spec.validate();
  return spec;
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) count += (layer_widths[l] + 1) * layer_widths[l + 1];
  return count;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ArgumentError("MLP needs at least one layer (two widths)");
  for (std::size_t w : layer_widths) {
    if (w < 1) throw ArgumentError("MLP widths must be >= 1");
  }
  if (hidden_activations.size() != layer_widths.size() - 2) {
    std::ostringstream oss;
    oss << "MLP with " << num_layers() << " layers needs " << layer_widths.size() - 2
        << " hidden activations, got " << hidden_activations.size();
    throw ArgumentError(oss.str());
  }
}

void ModelParams::add(const std::string& name, Tensor tensor) {
  if (!tensor.defined()) throw ArgumentError("parameter '" + name + "' is undefined");
  if (!tensors_.emplace(name, std::move(tensor)).second) {
    throw ArgumentError("duplicate parameter name '" + name + "'");
  }
}

const Tensor& ModelParams::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ArgumentError("missing parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : tensors_) {
    Tensor handle = t;
    handle.zero_grad();
  }
}

ModelParams ModelParams::clone() const {
  ModelParams copy;
  for (const auto& [name, t] : tensors_) copy.add(name, t.clone());
  return copy;
}

bool ModelParams::equal_values(const ModelParams& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  auto it = other.tensors_.begin();
  for (const auto& [name, t] : tensors_) {
    if (it->first != name || it->second.shape() != t.shape()) return false;
    const auto a = t.data();
    const auto b = it->second.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    }
    ++it;
  }
  return true;
}

GradMap collect_grads(const ModelParams& params) {
  GradMap grads;
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) throw ArgumentError("parameter '" + name + "' has no gradient");
    grads.emplace(name, std::vector<double>(t.grad().begin(), t.grad().end()));
  }
  return grads;
}

Tensor mlp_forward(Tape& tape, const ModelParams& params, const MlpSpec& spec, const Tensor& input,
                   const std::string& prefix) {
  spec.validate();
  if (input.rank() != 2 || input.cols() != spec.input_width()) {
    std::ostringstream oss;
    oss << "MLP '" << prefix << "' expects input [rows, " << spec.input_width() << "], got "
        << shape_string(input.shape());
    throw ArgumentError(oss.str());
  }
  Tensor x = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::string wname = prefix + "W" + std::to_string(l);
    const std::string bname = prefix + "b" + std::to_string(l);
    const Tensor& weight = params.get(wname);
    const Tensor& bias = params.get(bname);
    const Shape wshape{spec.layer_widths[l], spec.layer_widths[l + 1]};
    const Shape bshape{spec.layer_widths[l + 1]};
    if (weight.shape() != wshape) {
      throw ArgumentError("parameter '" + wname + "' has shape " + shape_string(weight.shape()) + ", expected " +
                          shape_string(wshape));
    }
    if (bias.shape() != bshape) {
      throw ArgumentError("parameter '" + bname + "' has shape " + shape_string(bias.shape()) + ", expected " +
                          shape_string(bshape));
    }
    x = affine(tape, x, weight, bias);
    const bool last = l + 1 == spec.num_layers();
    x = apply_activation(tape, x, last ? spec.output_activation : spec.hidden_activations[l]);
  }
  return x;
}

void init_mlp(ModelParams& params, const MlpSpec& spec, const std::string& prefix, std::mt19937_64& rng) {
  spec.validate();
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t fan_in = spec.layer_widths[l];
    const std::size_t fan_out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(fan_in * fan_out);
    for (double& x : w) x = dist(rng);
    params.add(prefix + "W" + std::to_string(l), Tensor({fan_in, fan_out}, std::move(w), true));
    params.add(prefix + "b" + std::to_string(l), Tensor::zeros({fan_out}, true));
  }
}

ModelParams init_params(const MlpSpec& spec, std::uint64_t seed, const std::string& prefix) {
  std::mt19937_64 rng(seed);
  ModelParams params;
  init_mlp(params, spec, prefix, rng);
  return params;
}

}  // namespace wugnn::diff
