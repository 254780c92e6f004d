#pragma once

#include <functional>
#include <string>

#include "wugnn/mlp.hpp"

namespace wugnn::diff {

/// A scalar function of a parameter set, evaluated on the given tape.
using ScalarFn = std::function<Tensor(Tape&, const ModelParams&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients of f against central differences,
/// coordinate by coordinate. Relative error uses max(|a|, |b|, 1e-8) as the
/// denominator. `params` is not modified.
GradCheckResult finite_diff_check(const ScalarFn& f, const ModelParams& params, double step = 1e-5);

}  // namespace wugnn::diff
