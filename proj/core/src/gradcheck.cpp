#include "wugnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "wugnn/errors.hpp"

namespace wugnn::diff {

GradCheckResult finite_diff_check(const ScalarFn& f, const ModelParams& params, double step) {
  if (!(step > 0.0)) throw ArgumentError("finite_diff_check: step must be > 0");
  ModelParams work = params.clone();
  for (const auto& [name, t] : work) {
    Tensor handle = t;
    handle.set_requires_grad(true);
  }
  work.zero_grad();
  {
    Tape tape;
    Tensor out = f(tape, work);
    tape.backward(out);
  }

  auto eval = [&] {
    Tape tape = Tape::no_grad();
    return f(tape, work).item();
  };

  GradCheckResult result;
  for (const auto& [name, t] : work) {
    Tensor handle = t;
    auto data = handle.mutable_data();
    const auto grad = t.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double original = data[i];
      data[i] = original + step;
      const double plus = eval();
      data[i] = original - step;
      const double minus = eval();
      data[i] = original;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_rel_error || result.coordinates == 1) {
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace wugnn::diff
