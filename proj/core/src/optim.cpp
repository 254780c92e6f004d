#include "wugnn/optim.hpp"

#include <cmath>

#include "wugnn/errors.hpp"

namespace wugnn::diff {

void adam_step(ModelParams& params, const GradMap& grads, AdamState& state) {
  for (const auto& [name, tensor] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ArgumentError("adam_step: missing gradient for '" + name + "'");
    if (it->second.size() != tensor.size()) throw ArgumentError("adam_step: gradient size mismatch for '" + name + "'");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (const auto& [name, tensor] : params) {
    const std::vector<double>& g = grads.at(name);
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.empty()) m.assign(g.size(), 0.0);
    if (v.empty()) v.assign(g.size(), 0.0);
    Tensor handle = tensor;
    auto data = handle.mutable_data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace wugnn::diff
