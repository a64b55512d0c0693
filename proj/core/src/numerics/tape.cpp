#define COGSR_TAPE_INSTANTIATION
#include "cogsr/numerics/tape.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cogsr/error.hpp"

namespace cogsr::numerics {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

template <typename T>
ConstMapMat<T> as_matrix(const Tensor<T>& t) {
  return ConstMapMat<T>(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
MapMat<T> as_matrix(std::span<T> buf, std::size_t rows, std::size_t cols) {
  return MapMat<T>(buf.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
ConstMapMat<T> as_matrix(std::span<const T> buf, std::size_t rows, std::size_t cols) {
  return ConstMapMat<T>(buf.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
void require_2d(const Tensor<T>& t, const char* op) {
  if (t.ndim() != 2) {
    throw DimensionError(std::string(op) + " expects a 2-D tensor, got " + shape_to_string(t.shape()));
  }
}

template <typename T>
bool is_row_broadcast(const Tensor<T>& a, const Tensor<T>& b) {
  if (b.size() != a.cols()) return false;
  return b.ndim() == 1 || (b.ndim() == 2 && b.dim(0) == 1);
}

enum class Broadcast { none, row };

template <typename T>
Broadcast binary_mode(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (is_row_broadcast(a, b)) return Broadcast::row;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
                       shape_to_string(b.shape()));
}

constexpr std::array<std::string_view, 17> kOps = {
    "add",   "sub",  "mul",       "scale", "matmul", "transpose", "reshape", "concat",
    "slice", "softmax", "layer_norm", "silu", "embedding", "mean", "mse", "softmax_cross_entropy", "linear"};

}  // namespace

std::span<const std::string_view> registered_ops() { return kOps; }

template <typename T>
bool Tape<T>::track(std::initializer_list<const Tensor<T>*> inputs) const {
  if (!recording_) return false;
  for (const Tensor<T>* t : inputs) {
    if (t && t->defined() && t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss, T seed) {
  if (loss.size() != 1) {
    throw DimensionError("backward expects a scalar loss, got shape " + shape_to_string(loss.shape()));
  }
  if (entries_.empty()) throw Error("backward called on an empty tape");
  Tensor<T> l = loss;
  l.grad()[0] += seed;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

template <typename T>
Tensor<T> Tape<T>::add(const Tensor<T>& a, const Tensor<T>& b) {
  const Broadcast mode = binary_mode(a, b, "add");
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  const std::size_t n = a.size();
  if (mode == Broadcast::none) {
    for (std::size_t i = 0; i < n; ++i) o[i] = x[i] + y[i];
  } else {
    const std::size_t c = a.cols();
    for (std::size_t i = 0; i < n; ++i) o[i] = x[i] + y[i % c];
  }
  if (track({&a, &b})) {
    out.set_requires_grad(true);
    record("add", [a, b, out, mode]() mutable {
      auto g = std::as_const(out).grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        if (mode == Broadcast::none) {
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        } else {
          const std::size_t c = gb.size();
          for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::sub(const Tensor<T>& a, const Tensor<T>& b) {
  const Broadcast mode = binary_mode(a, b, "sub");
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  const std::size_t c = a.cols();
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = x[i] - y[mode == Broadcast::none ? i : i % c];
  if (track({&a, &b})) {
    out.set_requires_grad(true);
    record("sub", [a, b, out, mode]() mutable {
      auto g = std::as_const(out).grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        const std::size_t c = gb.size();
        for (std::size_t i = 0; i < g.size(); ++i) gb[mode == Broadcast::none ? i : i % c] -= g[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::mul(const Tensor<T>& a, const Tensor<T>& b) {
  const Broadcast mode = binary_mode(a, b, "mul");
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  const std::size_t c = a.cols();
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = x[i] * y[mode == Broadcast::none ? i : i % c];
  if (track({&a, &b})) {
    out.set_requires_grad(true);
    record("mul", [a, b, out, mode]() mutable {
      auto g = std::as_const(out).grad();
      auto x = std::as_const(a).data();
      auto y = std::as_const(b).data();
      const std::size_t c = b.size();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[mode == Broadcast::none ? i : i % c];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[mode == Broadcast::none ? i : i % c] += g[i] * x[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::scale(const Tensor<T>& a, T factor) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto o = out.data();
  auto x = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) o[i] = x[i] * factor;
  if (track({&a})) {
    out.set_requires_grad(true);
    record("scale", [a, out, factor]() mutable {
      auto g = std::as_const(out).grad();
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t n = b.dim(1);
  Tensor<T> out = Tensor<T>::zeros({m, n});
  as_matrix(out.data(), m, n).noalias() = as_matrix(a) * as_matrix(b);
  if (track({&a, &b})) {
    out.set_requires_grad(true);
    record("matmul", [a, b, out]() mutable {
      const auto g = as_matrix(std::as_const(out).grad(), out.rows(), out.cols());
      if (a.requires_grad()) {
        as_matrix(a.grad(), a.rows(), a.cols()).noalias() += g * as_matrix(std::as_const(b)).transpose();
      }
      if (b.requires_grad()) {
        as_matrix(b.grad(), b.rows(), b.cols()).noalias() += as_matrix(std::as_const(a)).transpose() * g;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::transpose(const Tensor<T>& a) {
  require_2d(a, "transpose");
  const std::size_t r = a.dim(0);
  const std::size_t c = a.dim(1);
  Tensor<T> out = Tensor<T>::zeros({c, r});
  as_matrix(out.data(), c, r) = as_matrix(a).transpose();
  if (track({&a})) {
    out.set_requires_grad(true);
    record("transpose", [a, out, r, c]() mutable {
      as_matrix(a.grad(), r, c) += as_matrix(std::as_const(out).grad(), c, r).transpose();
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::reshape(const Tensor<T>& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(a.shape()) + " as " + shape_to_string(shape));
  }
  Tensor<T> out = Tensor<T>::from(std::move(shape), a.values());
  if (track({&a})) {
    out.set_requires_grad(true);
    record("reshape", [a, out]() mutable {
      auto g = std::as_const(out).grad();
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::concat(std::span<const Tensor<T>> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_2d(p, "concat");
  const std::size_t other = 1 - axis;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.dim(other) != parts.front().dim(other)) {
      throw DimensionError("concat: mismatched shapes " + shape_to_string(parts.front().shape()) + " and " +
                           shape_to_string(p.shape()));
    }
    total += p.dim(axis);
  }
  Shape shape = parts.front().shape();
  shape[axis] = total;
  Tensor<T> out = Tensor<T>::zeros(shape);
  const std::size_t out_cols = shape[1];
  std::size_t offset = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    auto src = p.data();
    const std::size_t pr = p.dim(0);
    const std::size_t pc = p.dim(1);
    auto o = out.data();
    for (std::size_t r = 0; r < pr; ++r) {
      for (std::size_t c = 0; c < pc; ++c) {
        const std::size_t orow = axis == 0 ? r + offset : r;
        const std::size_t ocol = axis == 1 ? c + offset : c;
        o[orow * out_cols + ocol] = src[r * pc + c];
      }
    }
    offset += p.dim(axis);
    any_grad = any_grad || track({&p});
  }
  if (any_grad) {
    out.set_requires_grad(true);
    std::vector<Tensor<T>> inputs(parts.begin(), parts.end());
    record("concat", [inputs, out, axis, out_cols]() mutable {
      auto g = std::as_const(out).grad();
      std::size_t offset = 0;
      for (auto& p : inputs) {
        const std::size_t pr = p.dim(0);
        const std::size_t pc = p.dim(1);
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t r = 0; r < pr; ++r) {
            for (std::size_t c = 0; c < pc; ++c) {
              const std::size_t orow = axis == 0 ? r + offset : r;
              const std::size_t ocol = axis == 1 ? c + offset : c;
              gp[r * pc + c] += g[orow * out_cols + ocol];
            }
          }
        }
        offset += p.dim(axis);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::slice(const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  require_2d(a, "slice");
  if (axis > 1) throw DimensionError("slice: axis must be 0 or 1");
  if (begin >= end || end > a.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of bounds for " + shape_to_string(a.shape()));
  }
  const std::size_t rows = axis == 0 ? end - begin : a.dim(0);
  const std::size_t cols = axis == 1 ? end - begin : a.dim(1);
  const std::size_t src_cols = a.dim(1);
  const std::size_t r0 = axis == 0 ? begin : 0;
  const std::size_t c0 = axis == 1 ? begin : 0;
  Tensor<T> out = Tensor<T>::zeros({rows, cols});
  auto o = out.data();
  auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>((r + r0) * src_cols + c0), cols,
                o.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  if (track({&a})) {
    out.set_requires_grad(true);
    record("slice", [a, out, rows, cols, src_cols, r0, c0]() mutable {
      auto g = std::as_const(out).grad();
      auto ga = a.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) ga[(r + r0) * src_cols + c0 + c] += g[r * cols + c];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::softmax(const Tensor<T>& a) {
  const std::size_t cols = a.cols();
  const std::size_t rows = a.rows();
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto x = a.data();
  auto y = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * cols;
    T* yr = y.data() + r * cols;
    T mx = *std::max_element(xr, xr + cols);
    T sum = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    const T inv = T(1) / sum;
    for (std::size_t c = 0; c < cols; ++c) yr[c] *= inv;
  }
  if (track({&a})) {
    out.set_requires_grad(true);
    record("softmax", [a, out, rows, cols]() mutable {
      auto g = std::as_const(out).grad();
      auto y = std::as_const(out).data();
      auto ga = a.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * cols;
        T dot = 0;
        for (std::size_t c = 0; c < cols; ++c) dot += g[base + c] * y[base + c];
        for (std::size_t c = 0; c < cols; ++c) ga[base + c] += y[base + c] * (g[base + c] - dot);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T epsilon) {
  const std::size_t n = x.cols();
  if (n < 2) throw DimensionError("layer_norm: normalization axis length must be at least 2");
  if (gain.defined() && gain.size() != n) throw DimensionError("layer_norm: gain size mismatch");
  if (bias.defined() && bias.size() != n) throw DimensionError("layer_norm: bias size mismatch");
  const std::size_t rows = x.rows();
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  std::vector<T> xhat(x.size());
  std::vector<T> inv_std(rows);
  auto xv = x.data();
  auto y = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * n;
    T mu = 0;
    for (std::size_t c = 0; c < n; ++c) mu += xr[c];
    mu /= T(n);
    T var = 0;
    for (std::size_t c = 0; c < n; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= T(n);
    const T inv = T(1) / std::sqrt(var + epsilon);
    inv_std[r] = inv;
    for (std::size_t c = 0; c < n; ++c) {
      const T h = (xr[c] - mu) * inv;
      xhat[r * n + c] = h;
      T v = h;
      if (gain.defined()) v *= gain[c];
      if (bias.defined()) v += bias[c];
      y[r * n + c] = v;
    }
  }
  if (track({&x, &gain, &bias})) {
    out.set_requires_grad(true);
    record("layer_norm", [x, gain, bias, out, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
                          n]() mutable {
      auto g = std::as_const(out).grad();
      if (gain.defined() && gain.requires_grad()) {
        auto gg = gain.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gg[i % n] += g[i] * xhat[i];
      }
      if (bias.defined() && bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
      }
      if (x.requires_grad()) {
        auto gx = x.grad();
        std::vector<T> dh(n);
        for (std::size_t r = 0; r < rows; ++r) {
          T mean_dh = 0;
          T mean_dh_h = 0;
          for (std::size_t c = 0; c < n; ++c) {
            const std::size_t i = r * n + c;
            dh[c] = g[i] * (gain.defined() ? gain[c] : T(1));
            mean_dh += dh[c];
            mean_dh_h += dh[c] * xhat[i];
          }
          mean_dh /= T(n);
          mean_dh_h /= T(n);
          for (std::size_t c = 0; c < n; ++c) {
            const std::size_t i = r * n + c;
            gx[i] += inv_std[r] * (dh[c] - mean_dh - xhat[i] * mean_dh_h);
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::silu(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  auto x = a.data();
  auto y = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = x[i] / (T(1) + std::exp(-x[i]));
  if (track({&a})) {
    out.set_requires_grad(true);
    record("silu", [a, out]() mutable {
      auto g = std::as_const(out).grad();
      auto x = std::as_const(a).data();
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T s = T(1) / (T(1) + std::exp(-x[i]));
        ga[i] += g[i] * s * (T(1) + x[i] * (T(1) - s));
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::embedding(const Tensor<T>& table, std::span<const int> ids) {
  require_2d(table, "embedding");
  if (ids.empty()) throw DimensionError("embedding: empty id list");
  const std::size_t vocab = table.dim(0);
  const std::size_t width = table.dim(1);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw DimensionError("embedding: id " + std::to_string(id) + " outside table of " + std::to_string(vocab) +
                           " rows");
    }
  }
  Tensor<T> out = Tensor<T>::zeros({ids.size(), width});
  auto src = table.data();
  auto o = out.data();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(ids[r]) * width), width,
                o.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  if (track({&table})) {
    out.set_requires_grad(true);
    record("embedding", [table, out, ids = std::vector<int>(ids.begin(), ids.end()), width]() mutable {
      auto g = std::as_const(out).grad();
      auto gt = table.grad();
      for (std::size_t r = 0; r < ids.size(); ++r) {
        const std::size_t base = static_cast<std::size_t>(ids[r]) * width;
        for (std::size_t c = 0; c < width; ++c) gt[base + c] += g[r * width + c];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::mean(const Tensor<T>& a) {
  T sum = 0;
  for (T v : a.data()) sum += v;
  const T n = T(a.size());
  Tensor<T> out = Tensor<T>::scalar(sum / n);
  if (track({&a})) {
    out.set_requires_grad(true);
    record("mean", [a, out, n]() mutable {
      const T g = std::as_const(out).grad()[0] / n;
      for (T& v : a.grad()) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::mse(const Tensor<T>& predicted, const Tensor<T>& target) {
  if (predicted.shape() != target.shape()) {
    throw DimensionError("mse: shape mismatch " + shape_to_string(predicted.shape()) + " vs " +
                         shape_to_string(target.shape()));
  }
  auto p = predicted.data();
  auto q = target.data();
  T sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T d = p[i] - q[i];
    sum += d * d;
  }
  const T n = T(p.size());
  Tensor<T> out = Tensor<T>::scalar(sum / n);
  if (track({&predicted, &target})) {
    out.set_requires_grad(true);
    record("mse", [predicted, target, out, n]() mutable {
      const T g = std::as_const(out).grad()[0] * T(2) / n;
      auto p = std::as_const(predicted).data();
      auto q = std::as_const(target).data();
      if (predicted.requires_grad()) {
        auto gp = predicted.grad();
        for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g * (p[i] - q[i]);
      }
      if (target.requires_grad()) {
        auto gq = target.grad();
        for (std::size_t i = 0; i < p.size(); ++i) gq[i] -= g * (p[i] - q[i]);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  if (labels.size() != rows) throw DimensionError("softmax_cross_entropy: one label per row required");
  std::vector<T> probs(logits.size());
  auto x = logits.data();
  T total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= cols) {
      throw DimensionError("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
    }
    const T* xr = x.data() + r * cols;
    const T mx = *std::max_element(xr, xr + cols);
    T sum = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      probs[r * cols + c] = std::exp(xr[c] - mx);
      sum += probs[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) probs[r * cols + c] /= sum;
    total += -(xr[label] - mx - std::log(sum));
  }
  Tensor<T> out = Tensor<T>::scalar(total / T(rows));
  if (track({&logits})) {
    out.set_requires_grad(true);
    record("softmax_cross_entropy", [logits, out, probs = std::move(probs), rows, cols,
                                     labels = std::vector<int>(labels.begin(), labels.end())]() {
      const T g = out.grad()[0] / T(rows);
      auto gl = logits.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const T onehot = static_cast<int>(c) == labels[r] ? T(1) : T(0);
          gl[r * cols + c] += g * (probs[r * cols + c] - onehot);
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> Tape<T>::linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  Tensor<T> y = matmul(x, w);
  return b.defined() ? add(y, b) : y;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace cogsr::numerics
