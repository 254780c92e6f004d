#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wugnn/tensor.hpp"

namespace wugnn::diff {

enum class Activation { relu, tanh, sigmoid, identity };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

Tensor apply_activation(Tape& tape, const Tensor& x, Activation act);

/// layer_widths = {input, hidden..., output}; one activation per hidden layer.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  std::vector<Activation> hidden_activations;
  Activation output_activation = Activation::identity;

  static MlpSpec make(std::vector<std::size_t> widths, Activation hidden = Activation::relu,
                      Activation output = Activation::identity);

  std::size_t num_layers() const { return layer_widths.size() - 1; }
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t parameter_count() const;
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Named parameter tensors, iterated in name order.
class ModelParams {
 public:
  using Map = std::map<std::string, Tensor>;

  void add(const std::string& name, Tensor tensor);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  std::size_t size() const noexcept { return tensors_.size(); }
  std::size_t element_count() const;
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  void zero_grad();
  /// Deep copy; the clone shares no storage with this set.
  ModelParams clone() const;
  /// Bitwise equality of names, shapes and values.
  bool equal_values(const ModelParams& other) const;

 private:
  Map tensors_;
};

using GradMap = std::map<std::string, std::vector<double>>;

/// Copies the accumulated grad of every parameter. Throws ArgumentError if a
/// parameter has none.
GradMap collect_grads(const ModelParams& params);

/// Affine layers `x * W{l} + b{l}` under names prefix + "W0", prefix + "b0", ...
Tensor mlp_forward(Tape& tape, const ModelParams& params, const MlpSpec& spec, const Tensor& input,
                   const std::string& prefix = "");

/// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
void init_mlp(ModelParams& params, const MlpSpec& spec, const std::string& prefix, std::mt19937_64& rng);
ModelParams init_params(const MlpSpec& spec, std::uint64_t seed, const std::string& prefix = "");

}  // namespace wugnn::diff
