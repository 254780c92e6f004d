#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wugnn/mlp.hpp"

namespace wugnn::diff {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;
};

/// One bias-corrected Adam update of every parameter in place.
void adam_step(ModelParams& params, const GradMap& grads, AdamState& state);

}  // namespace wugnn::diff
