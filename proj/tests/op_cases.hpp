#pragma once

// One finite-difference case per primitive op. Each case projects the op's
// output onto fixed random weights so every output coordinate matters.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wugnn/gradcheck.hpp"
#include "wugnn/tensor.hpp"

namespace wugnn::testing {

struct OpCase {
  std::string name;
  diff::ModelParams params;
  diff::ScalarFn fn;
};

inline diff::Tensor random_tensor(diff::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0,
                                  bool requires_grad = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> data(diff::shape_size(shape));
  for (double& x : data) x = dist(rng);
  return diff::Tensor(std::move(shape), std::move(data), requires_grad);
}

/// Values in [lo, hi] kept at least `gap` away from every kink in `kinks`.
inline diff::Tensor away_from(diff::Shape shape, std::uint64_t seed, std::vector<double> kinks, double gap) {
  auto t = random_tensor(std::move(shape), seed, -2.0, 2.0);
  for (double& x : t.mutable_data()) {
    for (double k : kinks) {
      if (std::abs(x - k) < gap) x = k + (x < k ? -gap : gap);
    }
  }
  return t;
}

inline diff::Tensor project(diff::Tape& tape, const diff::Tensor& out, std::uint64_t seed) {
  const auto w = random_tensor(out.shape(), seed ^ 0x9e3779b97f4a7c15ULL, -1.0, 1.0, false);
  return diff::sum_reduce(tape, diff::mul(tape, out, w));
}

inline diff::ModelParams params_of(std::initializer_list<std::pair<const char*, diff::Tensor>> items) {
  diff::ModelParams p;
  for (const auto& [name, t] : items) p.add(name, t);
  return p;
}

inline std::vector<OpCase> op_cases() {
  using namespace diff;
  std::vector<OpCase> cases;
  auto unary = [&](std::string name, Tensor a, auto op) {
    cases.push_back({std::move(name), params_of({{"a", a}}), [op](Tape& t, const ModelParams& p) {
                       return project(t, op(t, p.get("a")), 1);
                     }});
  };
  auto binary = [&](std::string name, Tensor a, Tensor b, auto op) {
    cases.push_back({std::move(name), params_of({{"a", a}, {"b", b}}), [op](Tape& t, const ModelParams& p) {
                       return project(t, op(t, p.get("a"), p.get("b")), 2);
                     }});
  };

  binary("add", random_tensor({3, 4}, 10), random_tensor({3, 4}, 11), add);
  binary("add_broadcast", random_tensor({3, 4}, 12), random_tensor({4}, 13), add);
  binary("add_scalar_operand", random_tensor({3, 4}, 14), random_tensor({1}, 15), add);
  binary("sub", random_tensor({3, 4}, 16), random_tensor({4}, 17), sub);
  binary("mul", random_tensor({3, 4}, 18), random_tensor({3, 4}, 19), mul);
  binary("mul_broadcast", random_tensor({3, 4}, 20), random_tensor({4}, 21), mul);
  binary("div", random_tensor({3, 4}, 22), random_tensor({3, 4}, 23, 0.5, 2.0), div);
  binary("div_broadcast", random_tensor({3, 4}, 24), random_tensor({4}, 25, 0.5, 2.0), div);
  binary("matmul", random_tensor({3, 5}, 26), random_tensor({5, 2}, 27), matmul);
  binary("scale_rows", random_tensor({4, 3}, 28), random_tensor({4}, 29), scale_rows);
  cases.push_back({"affine", params_of({{"x", random_tensor({4, 3}, 30)}, {"W", random_tensor({3, 2}, 31)},
                                        {"b", random_tensor({2}, 32)}}),
                   [](Tape& t, const ModelParams& p) {
                     return project(t, affine(t, p.get("x"), p.get("W"), p.get("b")), 3);
                   }});
  unary("scale", random_tensor({3, 3}, 33), [](Tape& t, const Tensor& a) { return scale(t, a, -1.7); });
  unary("add_scalar", random_tensor({3, 3}, 34), [](Tape& t, const Tensor& a) { return add_scalar(t, a, 0.3); });
  cases.push_back({"sum_reduce", params_of({{"a", random_tensor({3, 4}, 35)}}),
                   [](Tape& t, const ModelParams& p) { return sum_reduce(t, square(t, p.get("a"))); }});
  unary("log", random_tensor({3, 4}, 36, 0.2, 3.0), [](Tape& t, const Tensor& a) { return diff::log(t, a); });
  unary("exp", random_tensor({3, 4}, 37), [](Tape& t, const Tensor& a) { return diff::exp(t, a); });
  unary("relu", away_from({3, 4}, 38, {0.0}, 0.05), [](Tape& t, const Tensor& a) { return relu(t, a); });
  unary("tanh", random_tensor({3, 4}, 39, -2.0, 2.0), [](Tape& t, const Tensor& a) { return diff::tanh(t, a); });
  unary("sigmoid", random_tensor({3, 4}, 40, -3.0, 3.0), [](Tape& t, const Tensor& a) { return sigmoid(t, a); });
  unary("square", random_tensor({3, 4}, 41), [](Tape& t, const Tensor& a) { return square(t, a); });
  unary("clamp", away_from({3, 4}, 42, {-0.5, 0.8}, 0.05),
        [](Tape& t, const Tensor& a) { return clamp(t, a, -0.5, 0.8); });

  static const std::vector<std::size_t> gather_index = {2, 0, 0, 1, 2};
  unary("gather_rows", random_tensor({3, 2}, 43),
        [](Tape& t, const Tensor& a) { return gather_rows(t, a, gather_index); });
  static const std::vector<std::size_t> scatter_index = {0, 0, 1, 3};
  unary("scatter_add_rows", random_tensor({4, 2}, 44),
        [](Tape& t, const Tensor& a) { return scatter_add_rows(t, a, scatter_index, 4); });

  static const std::vector<Tensor> blocks = {random_tensor({2, 2}, 45, 0.0, 1.0, false),
                                             random_tensor({3, 3}, 46, 0.0, 1.0, false)};
  static const std::vector<std::size_t> offsets = {0, 2, 5};
  for (bool transpose : {false, true}) {
    unary(transpose ? "block_matmul_transpose" : "block_matmul", random_tensor({5, 3}, 47),
          [transpose](Tape& t, const Tensor& x) { return block_matmul(t, blocks, offsets, x, transpose); });
  }

  static const std::vector<std::size_t> src = {0, 1, 2, 2, 3};
  static const std::vector<std::size_t> dst = {1, 0, 0, 3, 2};
  cases.push_back({"edge_weighted_aggregate",
                   params_of({{"x", random_tensor({4, 3}, 48)}, {"w", random_tensor({5}, 49)}}),
                   [](Tape& t, const ModelParams& p) {
                     return project(t, edge_weighted_aggregate(t, p.get("x"), src, dst, p.get("w"), 4), 4);
                   }});
  cases.push_back({"concat_cols", params_of({{"a", random_tensor({3, 2}, 50)}, {"b", random_tensor({3, 1}, 51)}}),
                   [](Tape& t, const ModelParams& p) {
                     const std::vector<Tensor> parts = {p.get("a"), p.get("b")};
                     return project(t, concat_cols(t, parts), 5);
                   }});
  unary("slice_cols", random_tensor({3, 4}, 52), [](Tape& t, const Tensor& a) { return slice_cols(t, a, 1, 3); });
  return cases;
}

}  // namespace wugnn::testing
