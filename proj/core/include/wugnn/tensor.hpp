#pragma once

// Dense row-major tensors with a record-then-reverse tape.
//
// A Tensor is a shared handle; copying it aliases the same storage. Every
// primitive op takes the Tape it records on. A tape built with
// Tape::no_grad() records nothing, which is the inference path.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wugnn::diff {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Column vector [values.size(), 1].
  static Tensor column(std::span<const double> values, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  /// Leading dimension; 1 for a rank-0 tensor.
  std::size_t rows() const;
  /// Product of the trailing dimensions.
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double at(std::size_t index) const { return impl_->data[index]; }
  double at(std::size_t row, std::size_t col) const { return impl_->data[row * cols() + col]; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  void zero_grad();
  void clear_grad() { impl_->grad.clear(); }

  /// Deep copy of shape, data and the requires_grad flag; grad is not copied.
  Tensor clone() const;
  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  static Tape no_grad() { return Tape(false); }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool consumed() const noexcept { return consumed_; }

  /// Propagates d(output)/d(x) into every reachable requires_grad tensor.
  /// Grads accumulate into leaves; a tape can be reversed only once.
  void backward(const Tensor& output);

  /// True when an op over these inputs must be recorded.
  bool needs_record(std::initializer_list<const Tensor*> inputs) const;
  bool needs_record(std::span<const Tensor> inputs) const;
  /// Registers the adjoint of an op whose result is `output`.
  void record(const Tensor& output, std::function<void()> adjoint);

 private:
  struct Entry {
    std::shared_ptr<detail::TensorImpl> output;
    std::function<void()> adjoint;
  };
  std::vector<Entry> entries_;
  bool recording_ = true;
  bool consumed_ = false;
};

inline void backward(Tape& tape, const Tensor& output) { tape.backward(output); }

// Elementwise binary ops. `b` either matches a's shape, is a single element,
// or matches a's trailing dimensions (broadcast over a's leading dimension).
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor div(Tape& tape, const Tensor& a, const Tensor& b);

Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor add_scalar(Tape& tape, const Tensor& a, double offset);
/// Multiplies row r of `a` by s[r]; `s` has a.rows() elements.
Tensor scale_rows(Tape& tape, const Tensor& a, const Tensor& s);

/// [m, k] x [k, n] -> [m, n].
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
/// x [m, k] times weight [k, n], plus bias [n] on every row; one pass.
Tensor affine(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Sum of all elements as a rank-0 tensor.
Tensor sum_reduce(Tape& tape, const Tensor& a);

Tensor log(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor relu(Tape& tape, const Tensor& a);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor square(Tape& tape, const Tensor& a);
/// Gradient passes where lo <= a <= hi.
Tensor clamp(Tape& tape, const Tensor& a, double lo, double hi);

/// out[k] = a[index[k]] (row-wise).
Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> index);
/// out[index[k]] += a[k]; out has out_rows rows, zero where nothing lands.
Tensor scatter_add_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> index,
                        std::size_t out_rows);

/// Block-diagonal product with constant square blocks: rows
/// [offsets[g], offsets[g + 1]) of the result are blocks[g] (or its transpose)
/// times the same rows of x. Only x receives gradients.
Tensor block_matmul(Tape& tape, std::span<const Tensor> blocks, std::span<const std::size_t> offsets,
                    const Tensor& x, bool transpose = false);

/// out[dst[e]] += weight[e] * x[src[e]] over all edges e. Same value and
/// gradients as scatter_add_rows(scale_rows(gather_rows(x, src), weight), dst),
/// without materializing the per-edge rows.
Tensor edge_weighted_aggregate(Tape& tape, const Tensor& x, std::span<const std::size_t> src,
                               std::span<const std::size_t> dst, const Tensor& weight, std::size_t out_rows);

/// Rank-2 inputs with equal row counts, joined along columns.
Tensor concat_cols(Tape& tape, std::span<const Tensor> parts);
Tensor slice_cols(Tape& tape, const Tensor& a, std::size_t begin, std::size_t end);

}  // namespace wugnn::diff
