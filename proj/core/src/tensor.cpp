#include "wugnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Core>

#include "wugnn/errors.hpp"

namespace wugnn::diff {

using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream oss;
  oss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) oss << (i ? ", " : "") << shape[i];
  oss << ']';
  return oss.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  if (shape_size(shape) != data.size()) {
    std::ostringstream oss;
    oss << "tensor of shape " << shape_string(shape) << " given " << data.size() << " values";
    throw ArgumentError(oss.str());
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::column(std::span<const double> values, bool requires_grad) {
  return Tensor({values.size(), 1}, std::vector<double>(values.begin(), values.end()), requires_grad);
}

std::size_t Tensor::rows() const { return impl_->shape.empty() ? 1 : impl_->shape[0]; }

std::size_t Tensor::cols() const {
  const auto& shape = impl_->shape;
  std::size_t c = 1;
  for (std::size_t d = 1; d < shape.size(); ++d) c *= shape[d];
  return c;
}

double Tensor::item() const {
  if (size() != 1) throw ArgumentError("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->data.size(), 0.0); }

Tensor Tensor::clone() const { return Tensor(shape(), impl_->data, impl_->requires_grad); }

// ---------------------------------------------------------------------------
// Tape

bool Tape::needs_record(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

bool Tape::needs_record(std::span<const Tensor> inputs) const {
  if (!recording_) return false;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

void Tape::record(const Tensor& output, std::function<void()> adjoint) {
  if (consumed_) throw ArgumentError("cannot record on a tape that was already reversed");
  output.impl()->requires_grad = true;
  entries_.push_back(Entry{output.impl(), std::move(adjoint)});
}

void Tape::backward(const Tensor& output) {
  if (consumed_) throw ArgumentError("backward called twice on the same tape; re-record the forward pass");
  if (!output.defined() || output.size() != 1) {
    throw ArgumentError("backward needs a scalar output, got shape " +
                        (output.defined() ? shape_string(output.shape()) : std::string("<undefined>")));
  }
  std::size_t last = entries_.size();
  for (std::size_t i = entries_.size(); i-- > 0;) {
    if (entries_[i].output == output.impl()) {
      last = i;
      break;
    }
  }
  if (last == entries_.size()) throw ArgumentError("backward output was not produced on this tape");
  consumed_ = true;
  output.impl()->grad.assign(1, 1.0);
  for (std::size_t i = last + 1; i-- > 0;) {
    // Empty outputs never hold a grad; their adjoints still zero-fill the inputs.
    const auto& out = *entries_[i].output;
    if (!out.grad.empty() || out.data.empty()) entries_[i].adjoint();
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

std::vector<double>& grad_of(TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
  return t.grad;
}

enum class Broadcast { same, scalar, rows };

Broadcast broadcast_mode(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::same;
  if (b.size() == 1) return Broadcast::scalar;
  if (a.rank() >= 2 && b.shape() == Shape(a.shape().begin() + 1, a.shape().end())) return Broadcast::rows;
  std::ostringstream oss;
  oss << op << ": cannot broadcast " << shape_string(b.shape()) << " onto " << shape_string(a.shape());
  throw ArgumentError(oss.str());
}

inline std::size_t b_index(Broadcast mode, std::size_t i, std::size_t b_size) {
  switch (mode) {
    case Broadcast::same:
      return i;
    case Broadcast::scalar:
      return 0;
    case Broadcast::rows:
      return i % b_size;
  }
  return i;
}

// Elementwise binary op. `da`/`db` give d(out)/d(a), d(out)/d(b) from (a, b, out).
template <typename Fwd, typename Da, typename Db>
Tensor binary_op(Tape& tape, const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Da da, Db db) {
  const Broadcast mode = broadcast_mode(a, b, name);
  const std::size_t n = a.size();
  const std::size_t nb = b.size();
  std::vector<double> out(n);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(ad[i], bd[b_index(mode, i, nb)]);
  Tensor result(a.shape(), std::move(out));
  if (tape.needs_record({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
    tape.record(result, [ai, bi, oi, mode, da, db] {
      const std::size_t n = oi->data.size();
      const std::size_t nb = bi->data.size();
      const auto& g = oi->grad;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i] * da(ai->data[i], bi->data[b_index(mode, i, nb)], oi->data[i]);
        }
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t j = b_index(mode, i, nb);
          gb[j] += g[i] * db(ai->data[i], bi->data[j], oi->data[i]);
        }
      }
    });
  }
  return result;
}

// Elementwise unary op with derivative d(out)/d(a) from (a, out).
template <typename Fwd, typename Da>
Tensor unary_op(Tape& tape, const Tensor& a, Fwd fwd, Da da) {
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const auto ad = a.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(ad[i]);
  Tensor result(a.shape(), std::move(out));
  if (tape.needs_record({&a})) {
    ImplPtr ai = a.impl(), oi = result.impl();
    tape.record(result, [ai, oi, da] {
      auto& ga = grad_of(*ai);
      const auto& g = oi->grad;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * da(ai->data[i], oi->data[i]);
    });
  }
  return result;
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ArgumentError(std::string(op) + " expects a rank-2 tensor, got " + shape_string(t.shape()));
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Tensor div(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; }, [](double, double y, double out) { return -out / y; });
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary_op(
      tape, a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(Tape& tape, const Tensor& a, double offset) {
  return unary_op(
      tape, a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Tensor scale_rows(Tape& tape, const Tensor& a, const Tensor& s) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (s.size() != rows) {
    std::ostringstream oss;
    oss << "scale_rows: " << s.size() << " factors for " << rows << " rows";
    throw ArgumentError(oss.str());
  }
  std::vector<double> out(a.size());
  const auto ad = a.data();
  const auto sd = s.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = ad[r * cols + c] * sd[r];
  }
  Tensor result(a.shape(), std::move(out));
  if (tape.needs_record({&a, &s})) {
    ImplPtr ai = a.impl(), si = s.impl(), oi = result.impl();
    tape.record(result, [ai, si, oi, rows, cols] {
      const auto& g = oi->grad;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r * cols + c] * si->data[r];
        }
      }
      if (si->requires_grad) {
        auto& gs = grad_of(*si);
        for (std::size_t r = 0; r < rows; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * ai->data[r * cols + c];
          gs[r] += acc;
        }
      }
    });
  }
  return result;
}

namespace {

void matmul_kernel(const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n, double* out) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto rows = static_cast<Eigen::Index>(m), inner = static_cast<Eigen::Index>(k),
             cols = static_cast<Eigen::Index>(n);
  Eigen::Map<RowMajor>(out, rows, cols).noalias() +=
      Eigen::Map<const RowMajor>(a, rows, inner) * Eigen::Map<const RowMajor>(b, inner, cols);
}

}  // namespace

namespace {

void matmul_backward(TensorImpl& a, TensorImpl& b, const double* g, std::size_t m, std::size_t k, std::size_t n) {
  if (a.requires_grad) {
    // dA = dY * B^T
    auto& ga = grad_of(a);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b.data.data() + p * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * brow[j];
        ga[i * k + p] += acc;
      }
    }
  }
  if (b.requires_grad) {
    // dB = A^T * dY
    auto& gb = grad_of(b);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = a.data[i * k + p];
        if (aip == 0.0) continue;
        double* gbrow = gb.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * g[i * n + j];
      }
    }
  }
}

void check_matmul_shapes(const Tensor& a, const Tensor& b, const char* op) {
  require_rank2(a, op);
  require_rank2(b, op);
  if (b.shape()[0] != a.shape()[1]) {
    throw ArgumentError(std::string(op) + ": inner dimensions differ, " + shape_string(a.shape()) + " x " +
                        shape_string(b.shape()));
  }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  check_matmul_shapes(a, b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  matmul_kernel(a.data().data(), b.data().data(), m, k, n, out.data());
  Tensor result({m, n}, std::move(out));
  if (tape.needs_record({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
    tape.record(result, [ai, bi, oi, m, k, n] { matmul_backward(*ai, *bi, oi->grad.data(), m, k, n); });
  }
  return result;
}

Tensor affine(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  check_matmul_shapes(x, weight, "affine");
  const std::size_t m = x.shape()[0], k = x.shape()[1], n = weight.shape()[1];
  if (bias.size() != n) {
    throw ArgumentError("affine: bias has " + std::to_string(bias.size()) + " elements for " + std::to_string(n) +
                        " outputs");
  }
  std::vector<double> out(m * n);
  const double* bd = bias.data().data();
  for (std::size_t i = 0; i < m; ++i) std::copy_n(bd, n, out.data() + i * n);
  matmul_kernel(x.data().data(), weight.data().data(), m, k, n, out.data());
  Tensor result({m, n}, std::move(out));
  if (tape.needs_record({&x, &weight, &bias})) {
    ImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.impl(), oi = result.impl();
    tape.record(result, [xi, wi, bi, oi, m, k, n] {
      const double* g = oi->grad.data();
      matmul_backward(*xi, *wi, g, m, k, n);
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
      }
    });
  }
  return result;
}

Tensor sum_reduce(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double x : a.data()) total += x;
  Tensor result = Tensor::scalar(total);
  if (tape.needs_record({&a})) {
    ImplPtr ai = a.impl(), oi = result.impl();
    tape.record(result, [ai, oi] {
      auto& ga = grad_of(*ai);
      const double g = oi->grad[0];
      for (double& x : ga) x += g;
    });
  }
  return result;
}

Tensor log(Tape& tape, const Tensor& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.at(i) > 0.0)) {
      std::ostringstream oss;
      oss << "log of non-positive value " << a.at(i) << " at index " << i;
      throw NumericalDomainError(oss.str());
    }
  }
  return unary_op(
      tape, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor exp(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return std::exp(x); }, [](double, double out) { return out; });
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return std::tanh(x); }, [](double, double out) { return 1.0 - out * out; });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double out) { return out * (1.0 - out); });
}

Tensor square(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor clamp(Tape& tape, const Tensor& a, double lo, double hi) {
  if (lo > hi) throw ArgumentError("clamp: lo > hi");
  return unary_op(
      tape, a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> index) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= rows) {
      std::ostringstream oss;
      oss << "gather_rows: index " << index[k] << " out of range for " << rows << " rows";
      throw ArgumentError(oss.str());
    }
  }
  Shape shape = a.rank() == 0 ? Shape{} : a.shape();
  if (shape.empty()) shape.push_back(1);
  shape[0] = index.size();
  std::vector<double> out(index.size() * cols);
  const auto ad = a.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    std::copy_n(ad.begin() + static_cast<std::ptrdiff_t>(index[k] * cols), cols, out.begin() + static_cast<std::ptrdiff_t>(k * cols));
  }
  Tensor result(std::move(shape), std::move(out));
  if (tape.needs_record({&a})) {
    ImplPtr ai = a.impl(), oi = result.impl();
    std::vector<std::size_t> idx(index.begin(), index.end());
    tape.record(result, [ai, oi, idx = std::move(idx), cols] {
      auto& ga = grad_of(*ai);
      const auto& g = oi->grad;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        for (std::size_t c = 0; c < cols; ++c) ga[idx[k] * cols + c] += g[k * cols + c];
      }
    });
  }
  return result;
}

Tensor scatter_add_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> index, std::size_t out_rows) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (index.size() != rows) {
    std::ostringstream oss;
    oss << "scatter_add_rows: " << index.size() << " indices for " << rows << " rows";
    throw ArgumentError(oss.str());
  }
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= out_rows) {
      std::ostringstream oss;
      oss << "scatter_add_rows: index " << index[k] << " out of range for " << out_rows << " rows";
      throw ArgumentError(oss.str());
    }
  }
  Shape shape = a.rank() == 0 ? Shape{1} : a.shape();
  shape[0] = out_rows;
  std::vector<double> out(out_rows * cols, 0.0);
  const auto ad = a.data();
  for (std::size_t k = 0; k < rows; ++k) {
    double* dst = &out[index[k] * cols];
    for (std::size_t c = 0; c < cols; ++c) dst[c] += ad[k * cols + c];
  }
  Tensor result(std::move(shape), std::move(out));
  if (tape.needs_record({&a})) {
    ImplPtr ai = a.impl(), oi = result.impl();
    std::vector<std::size_t> idx(index.begin(), index.end());
    tape.record(result, [ai, oi, idx = std::move(idx), cols] {
      auto& ga = grad_of(*ai);
      const auto& g = oi->grad;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        for (std::size_t c = 0; c < cols; ++c) ga[k * cols + c] += g[idx[k] * cols + c];
      }
    });
  }
  return result;
}

namespace {

// Accumulates in registers while consecutive edges share a destination, so
// destination-sorted edge lists touch each output row once.
template <std::size_t C>
void aggregate_fixed(const double* x, std::span<const std::size_t> src, std::span<const std::size_t> dst,
                     const double* w, double* out) {
  std::size_t e = 0;
  while (e < src.size()) {
    const std::size_t d = dst[e];
    double acc[C] = {};
    for (; e < src.size() && dst[e] == d; ++e) {
      const double we = w[e];
      const double* xs = x + src[e] * C;
      for (std::size_t c = 0; c < C; ++c) acc[c] += we * xs[c];
    }
    double* od = out + d * C;
    for (std::size_t c = 0; c < C; ++c) od[c] += acc[c];
  }
}

// Dense graphs put this loop on the inference hot path; fixed widths let the
// compiler unroll and vectorize it.
void aggregate_kernel(const double* x, std::span<const std::size_t> src, std::span<const std::size_t> dst,
                      const double* w, std::size_t cols, double* out) {
  switch (cols) {
    case 1:
      return aggregate_fixed<1>(x, src, dst, w, out);
    case 2:
      return aggregate_fixed<2>(x, src, dst, w, out);
    case 4:
      return aggregate_fixed<4>(x, src, dst, w, out);
    case 8:
      return aggregate_fixed<8>(x, src, dst, w, out);
    case 16:
      return aggregate_fixed<16>(x, src, dst, w, out);
    default:
      break;
  }
  for (std::size_t e = 0; e < src.size(); ++e) {
    const double we = w[e];
    const double* xs = x + src[e] * cols;
    double* od = out + dst[e] * cols;
    for (std::size_t c = 0; c < cols; ++c) od[c] += we * xs[c];
  }
}

}  // namespace

Tensor edge_weighted_aggregate(Tape& tape, const Tensor& x, std::span<const std::size_t> src,
                               std::span<const std::size_t> dst, const Tensor& weight, std::size_t out_rows) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const std::size_t edges = src.size();
  if (dst.size() != edges || weight.size() != edges) {
    std::ostringstream oss;
    oss << "edge_weighted_aggregate: " << src.size() << " sources, " << dst.size() << " destinations, "
        << weight.size() << " weights";
    throw ArgumentError(oss.str());
  }
  for (std::size_t e = 0; e < edges; ++e) {
    if (src[e] >= rows || dst[e] >= out_rows) throw ArgumentError("edge_weighted_aggregate: edge index out of range");
  }
  Shape shape = x.rank() == 0 ? Shape{1} : x.shape();
  shape[0] = out_rows;
  std::vector<double> out(out_rows * cols, 0.0);
  aggregate_kernel(x.data().data(), src, dst, weight.data().data(), cols, out.data());
  Tensor result(std::move(shape), std::move(out));
  if (tape.needs_record({&x, &weight})) {
    ImplPtr xi = x.impl(), wi = weight.impl(), oi = result.impl();
    std::vector<std::size_t> s(src.begin(), src.end());
    std::vector<std::size_t> d(dst.begin(), dst.end());
    tape.record(result, [xi, wi, oi, s = std::move(s), d = std::move(d), cols] {
      const double* g = oi->grad.data();
      if (xi->requires_grad) {
        auto& gx = grad_of(*xi);
        for (std::size_t e = 0; e < s.size(); ++e) {
          const double we = wi->data[e];
          const double* gd = g + d[e] * cols;
          double* gs = gx.data() + s[e] * cols;
          for (std::size_t c = 0; c < cols; ++c) gs[c] += we * gd[c];
        }
      }
      if (wi->requires_grad) {
        auto& gw = grad_of(*wi);
        for (std::size_t e = 0; e < s.size(); ++e) {
          const double* gd = g + d[e] * cols;
          const double* xs = xi->data.data() + s[e] * cols;
          double acc = 0.0;
          for (std::size_t c = 0; c < cols; ++c) acc += gd[c] * xs[c];
          gw[e] += acc;
        }
      }
    });
  }
  return result;
}

namespace {

void square_matmul_kernel(const double* a, const double* x, std::size_t n, std::size_t cols, double* y,
                          bool transpose) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto rows = static_cast<Eigen::Index>(n), c = static_cast<Eigen::Index>(cols);
  Eigen::Map<const RowMajor> am(a, rows, rows);
  Eigen::Map<const RowMajor> xm(x, rows, c);
  Eigen::Map<RowMajor> ym(y, rows, c);
  if (transpose) {
    ym.noalias() += am.transpose() * xm;
  } else {
    ym.noalias() += am * xm;
  }
}

}  // namespace

Tensor block_matmul(Tape& tape, std::span<const Tensor> blocks, std::span<const std::size_t> offsets,
                    const Tensor& x, bool transpose) {
  require_rank2(x, "block_matmul");
  if (offsets.size() != blocks.size() + 1 || offsets.front() != 0 || offsets.back() != x.rows()) {
    throw ArgumentError("block_matmul: offsets must run from 0 to " + std::to_string(x.rows()) + " with one entry per block plus one");
  }
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const std::size_t n = offsets[g + 1] - offsets[g];
    if (offsets[g + 1] < offsets[g] || blocks[g].shape() != Shape{n, n}) {
      throw ArgumentError("block_matmul: block " + std::to_string(g) + " has shape " +
                          shape_string(blocks[g].shape()) + ", expected [" + std::to_string(n) + ", " +
                          std::to_string(n) + "]");
    }
  }
  const std::size_t cols = x.cols();
  auto apply = [cols](const std::vector<ImplPtr>& bs, std::span<const std::size_t> off, const double* in,
                      double* out, bool trans) {
    for (std::size_t g = 0; g < bs.size(); ++g) {
      const std::size_t n = off[g + 1] - off[g];
      const double* a = bs[g]->data.data();
      if (n > 0) square_matmul_kernel(a, in + off[g] * cols, n, cols, out + off[g] * cols, trans);
    }
  };
  std::vector<ImplPtr> bs;
  bs.reserve(blocks.size());
  for (const Tensor& b : blocks) bs.push_back(b.impl());
  std::vector<double> out(x.size(), 0.0);
  apply(bs, offsets, x.data().data(), out.data(), transpose);
  Tensor result(x.shape(), std::move(out));
  if (tape.needs_record({&x})) {
    ImplPtr xi = x.impl(), oi = result.impl();
    std::vector<std::size_t> off(offsets.begin(), offsets.end());
    tape.record(result, [xi, oi, bs = std::move(bs), off = std::move(off), transpose, apply] {
      apply(bs, off, oi->grad.data(), grad_of(*xi).data(), !transpose);
    });
  }
  return result;
}

Tensor concat_cols(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != rows) throw ArgumentError("concat_cols: row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pd = parts[k].data();
    const std::size_t w = widths[k];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < w; ++c) out[r * total + offset + c] = pd[r * w + c];
    }
    offset += w;
  }
  Tensor result({rows, total}, std::move(out));
  if (tape.needs_record(parts)) {
    std::vector<ImplPtr> impls;
    for (const Tensor& p : parts) impls.push_back(p.impl());
    ImplPtr oi = result.impl();
    tape.record(result, [impls = std::move(impls), widths = std::move(widths), oi, rows, total] {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < impls.size(); ++k) {
        const std::size_t w = widths[k];
        if (impls[k]->requires_grad) {
          auto& gp = grad_of(*impls[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += oi->grad[r * total + offset + c];
          }
        }
        offset += w;
      }
    });
  }
  return result;
}

Tensor slice_cols(Tape& tape, const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (begin > end || end > cols) {
    std::ostringstream oss;
    oss << "slice_cols: range [" << begin << ", " << end << ") invalid for " << cols << " columns";
    throw ArgumentError(oss.str());
  }
  const std::size_t w = end - begin;
  std::vector<double> out(rows * w);
  const auto ad = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = ad[r * cols + begin + c];
  }
  Tensor result({rows, w}, std::move(out));
  if (tape.needs_record({&a})) {
    ImplPtr ai = a.impl(), oi = result.impl();
    tape.record(result, [ai, oi, rows, cols, begin, w] {
      auto& ga = grad_of(*ai);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < w; ++c) ga[r * cols + begin + c] += oi->grad[r * w + c];
      }
    });
  }
  return result;
}

}  // namespace wugnn::diff
