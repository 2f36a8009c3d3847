// Kernels for the ONNX operators the interpreter supports. All kernels work
// on row-major double tensors and follow the operator definitions of the
// default ONNX domain.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "graph.hpp"

namespace cmrqa::onnx {

const Tensor& OpContext::in(std::size_t i) const {
  if (!has(i)) fail("missing required input #" + std::to_string(i));
  return *inputs[i];
}

void OpContext::fail(const std::string& what) const {
  throw FormatError(node.op_type + " node '" + node.name + "': " + what);
}

namespace {

using Strides = std::vector<std::int64_t>;

Strides strides_of(const Shape& s) {
  Strides st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

std::int64_t normalize_axis(const OpContext& ctx, std::int64_t axis, std::size_t rank) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < -r || axis >= std::max<std::int64_t>(r, 1)) ctx.fail("axis " + std::to_string(axis) + " out of range");
  return axis < 0 ? axis + r : axis;
}

std::vector<std::int64_t> as_ints(const Tensor& t) {
  std::vector<std::int64_t> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<std::int64_t>(t.data[i]);
  return out;
}

// ---------------------------------------------------------------- broadcast

Shape broadcast_shapes(const OpContext& ctx, const std::vector<const Shape*>& shapes) {
  std::size_t rank = 0;
  for (auto* s : shapes) rank = std::max(rank, s->size());
  Shape out(rank, 1);
  for (auto* s : shapes) {
    const std::size_t off = rank - s->size();
    for (std::size_t i = 0; i < s->size(); ++i) {
      const auto d = (*s)[i];
      auto& o = out[off + i];
      if (d == o || d == 1) continue;
      if (o == 1) o = d;
      else ctx.fail("shapes " + shape_str(*shapes.front()) + " and " + shape_str(*s) + " do not broadcast");
    }
  }
  return out;
}

// Strides of `s` laid against `out`, zero on broadcast axes.
Strides broadcast_strides(const Shape& s, const Shape& out) {
  Strides st(out.size(), 0);
  const auto own = strides_of(s);
  const std::size_t off = out.size() - s.size();
  for (std::size_t i = 0; i < s.size(); ++i) st[off + i] = s[i] == 1 ? 0 : own[i];
  return st;
}

// Calls f(out_index, offsets) for every element of `out` in row-major order.
template <std::size_t N, typename F>
void for_each_broadcast(const Shape& out, const std::array<Strides, N>& strides, F&& f) {
  const auto total = element_count(out);
  if (total == 0) return;
  const std::size_t rank = out.size();
  std::vector<std::int64_t> counter(rank, 0);
  std::array<std::int64_t, N> offs{};
  for (std::int64_t idx = 0; idx < total; ++idx) {
    f(idx, offs);
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      for (std::size_t k = 0; k < N; ++k) offs[k] += strides[k][d];
      if (counter[d] < out[d]) break;
      for (std::size_t k = 0; k < N; ++k) offs[k] -= strides[k][d] * counter[d];
      counter[d] = 0;
    }
  }
}

template <typename F>
Tensor binary(const OpContext& ctx, const Tensor& a, const Tensor& b, ElemType type, F f) {
  if (a.shape == b.shape) {
    Tensor out(a.shape, type);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
    return out;
  }
  if (b.size() == 1 && b.rank() <= a.rank()) {
    Tensor out(a.shape, type);
    const double y = b.data[0];
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i], y);
    return out;
  }
  const Shape shape = broadcast_shapes(ctx, {&a.shape, &b.shape});
  Tensor out(shape, type);
  const std::array<Strides, 2> st{broadcast_strides(a.shape, shape), broadcast_strides(b.shape, shape)};
  for_each_broadcast(shape, st, [&](std::int64_t i, const std::array<std::int64_t, 2>& o) {
    out.data[static_cast<std::size_t>(i)] = f(a.data[static_cast<std::size_t>(o[0])], b.data[static_cast<std::size_t>(o[1])]);
  });
  return out;
}

double int_or_float(ElemType t, double v) { return is_integral(t) ? std::trunc(v) : v; }

std::vector<Tensor> op_add(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), c.in(0).type, std::plus<>())};
}
std::vector<Tensor> op_sub(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), c.in(0).type, std::minus<>())};
}
std::vector<Tensor> op_mul(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), c.in(0).type, std::multiplies<>())};
}
std::vector<Tensor> op_div(const OpContext& c) {
  const auto t = c.in(0).type;
  return {binary(c, c.in(0), c.in(1), t, [t](double x, double y) { return int_or_float(t, x / y); })};
}
std::vector<Tensor> op_pow(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), c.in(0).type, [](double x, double y) {
    return y == 2.0 ? x * x : y == 0.5 ? std::sqrt(x) : std::pow(x, y);
  })};
}
std::vector<Tensor> op_equal(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), ElemType::boolean, [](double x, double y) { return x == y ? 1.0 : 0.0; })};
}
std::vector<Tensor> op_less(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), ElemType::boolean, [](double x, double y) { return x < y ? 1.0 : 0.0; })};
}
std::vector<Tensor> op_greater(const OpContext& c) {
  return {binary(c, c.in(0), c.in(1), ElemType::boolean, [](double x, double y) { return x > y ? 1.0 : 0.0; })};
}

template <typename F>
std::vector<Tensor> variadic(const OpContext& c, F f) {
  Tensor acc = c.in(0);
  for (std::size_t i = 1; i < c.count(); ++i) acc = binary(c, acc, c.in(i), acc.type, f);
  return {acc};
}
std::vector<Tensor> op_max(const OpContext& c) {
  return variadic(c, [](double x, double y) { return std::max(x, y); });
}
std::vector<Tensor> op_min(const OpContext& c) {
  return variadic(c, [](double x, double y) { return std::min(x, y); });
}
std::vector<Tensor> op_sum(const OpContext& c) { return variadic(c, std::plus<>()); }

std::vector<Tensor> op_where(const OpContext& c) {
  const auto &cond = c.in(0), &x = c.in(1), &y = c.in(2);
  const Shape shape = broadcast_shapes(c, {&cond.shape, &x.shape, &y.shape});
  Tensor out(shape, x.type);
  const std::array<Strides, 3> st{broadcast_strides(cond.shape, shape), broadcast_strides(x.shape, shape),
                                  broadcast_strides(y.shape, shape)};
  for_each_broadcast(shape, st, [&](std::int64_t i, const std::array<std::int64_t, 3>& o) {
    out.data[static_cast<std::size_t>(i)] = cond.data[static_cast<std::size_t>(o[0])] != 0.0
                                                ? x.data[static_cast<std::size_t>(o[1])]
                                                : y.data[static_cast<std::size_t>(o[2])];
  });
  return {out};
}

// ---------------------------------------------------------------- unary

template <typename F>
Tensor unary(const Tensor& x, F f) {
  Tensor out(x.shape, x.type);
  for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = f(x.data[i]);
  return out;
}

std::vector<Tensor> op_identity(const OpContext& c) { return {c.in(0)}; }
std::vector<Tensor> op_dropout(const OpContext& c) {
  if (c.has(2) && c.in(2).data.at(0) != 0.0) c.fail("training_mode dropout is not supported");
  std::vector<Tensor> out{c.in(0)};
  if (c.node.outputs.size() > 1) out.push_back(unary(c.in(0), [](double) { return 1.0; }));
  if (out.size() > 1) out[1].type = ElemType::boolean;
  return out;
}
std::vector<Tensor> op_relu(const OpContext& c) {
  return {unary(c.in(0), [](double v) { return v > 0 ? v : 0.0; })};
}
std::vector<Tensor> op_leaky_relu(const OpContext& c) {
  const double alpha = c.node.attrs.get_float("alpha", 0.01);
  return {unary(c.in(0), [alpha](double v) { return v >= 0 ? v : alpha * v; })};
}
std::vector<Tensor> op_sigmoid(const OpContext& c) {
  return {unary(c.in(0), [](double v) { return 1.0 / (1.0 + std::exp(-v)); })};
}
std::vector<Tensor> op_hard_sigmoid(const OpContext& c) {
  const double alpha = c.node.attrs.get_float("alpha", 0.2), beta = c.node.attrs.get_float("beta", 0.5);
  return {unary(c.in(0), [=](double v) { return std::clamp(alpha * v + beta, 0.0, 1.0); })};
}
std::vector<Tensor> op_hard_swish(const OpContext& c) {
  return {unary(c.in(0), [](double v) { return v * std::clamp(v / 6.0 + 0.5, 0.0, 1.0); })};
}
std::vector<Tensor> op_tanh(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::tanh(v); })}; }
std::vector<Tensor> op_erf(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::erf(v); })}; }
std::vector<Tensor> op_sqrt(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::sqrt(v); })}; }
std::vector<Tensor> op_exp(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::exp(v); })}; }
std::vector<Tensor> op_log(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::log(v); })}; }
std::vector<Tensor> op_neg(const OpContext& c) { return {unary(c.in(0), [](double v) { return -v; })}; }
std::vector<Tensor> op_abs(const OpContext& c) { return {unary(c.in(0), [](double v) { return std::abs(v); })}; }
std::vector<Tensor> op_reciprocal(const OpContext& c) {
  return {unary(c.in(0), [](double v) { return 1.0 / v; })};
}
std::vector<Tensor> op_gelu(const OpContext& c) {
  const bool tanh_approx = c.node.attrs.get_string("approximate", "none") == "tanh";
  return {unary(c.in(0), [tanh_approx](double v) {
    if (tanh_approx) return 0.5 * v * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (v + 0.044715 * v * v * v)));
    return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
  })};
}
std::vector<Tensor> op_clip(const OpContext& c) {
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (c.opset < 11) {
    lo = c.node.attrs.get_float("min", lo);
    hi = c.node.attrs.get_float("max", hi);
  } else {
    if (c.has(1)) lo = c.in(1).data.at(0);
    if (c.has(2)) hi = c.in(2).data.at(0);
  }
  return {unary(c.in(0), [=](double v) { return std::min(std::max(v, lo), hi); })};
}

std::vector<Tensor> op_cast(const OpContext& c) {
  const auto to = static_cast<ElemType>(c.node.attrs.get_int("to", 1));
  Tensor out = c.in(0);
  out.type = to;
  for (auto& v : out.data) {
    switch (to) {
      case ElemType::float32: v = static_cast<double>(static_cast<float>(v)); break;
      case ElemType::float64: break;
      case ElemType::boolean: v = v != 0.0 ? 1.0 : 0.0; break;
      default: v = std::trunc(v); break;
    }
  }
  return {out};
}

// ---------------------------------------------------------------- softmax / norms

std::vector<Tensor> op_softmax(const OpContext& c) {
  const Tensor& x = c.in(0);
  Tensor out(x.shape, x.type);
  const std::int64_t rank = static_cast<std::int64_t>(x.rank());
  if (c.opset < 13) {
    // coerced to 2D [prod(shape[:axis]), prod(shape[axis:])]
    const auto axis = normalize_axis(c, c.node.attrs.get_int("axis", 1), x.rank());
    std::int64_t inner = 1;
    for (auto d = axis; d < rank; ++d) inner *= x.shape[static_cast<std::size_t>(d)];
    const std::int64_t outer = inner == 0 ? 0 : element_count(x.shape) / inner;
    for (std::int64_t o = 0; o < outer; ++o) {
      const double* src = x.data.data() + o * inner;
      double* dst = out.data.data() + o * inner;
      const double m = *std::max_element(src, src + inner);
      double sum = 0;
      for (std::int64_t i = 0; i < inner; ++i) sum += (dst[i] = std::exp(src[i] - m));
      for (std::int64_t i = 0; i < inner; ++i) dst[i] /= sum;
    }
    return {out};
  }
  const auto axis = static_cast<std::size_t>(normalize_axis(c, c.node.attrs.get_int("axis", -1), x.rank()));
  const std::int64_t n = x.shape[axis];
  std::int64_t inner = 1;
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.shape[d];
  const std::int64_t outer = n * inner == 0 ? 0 : element_count(x.shape) / (n * inner);
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      const std::int64_t base = o * n * inner + i;
      double m = -std::numeric_limits<double>::infinity();
      for (std::int64_t k = 0; k < n; ++k) m = std::max(m, x.data[static_cast<std::size_t>(base + k * inner)]);
      double sum = 0;
      for (std::int64_t k = 0; k < n; ++k) {
        const auto at = static_cast<std::size_t>(base + k * inner);
        sum += (out.data[at] = std::exp(x.data[at] - m));
      }
      for (std::int64_t k = 0; k < n; ++k) out.data[static_cast<std::size_t>(base + k * inner)] /= sum;
    }
  }
  return {out};
}

std::vector<Tensor> op_batch_norm(const OpContext& c) {
  if (c.node.attrs.get_int("training_mode", 0) != 0) c.fail("training_mode is not supported");
  const Tensor& x = c.in(0);
  const Tensor &scale = c.in(1), &bias = c.in(2), &mean = c.in(3), &var = c.in(4);
  const double eps = c.node.attrs.get_float("epsilon", 1e-5);
  if (x.rank() < 2) c.fail("input rank must be >= 2");
  const auto channels = x.shape[1];
  if (static_cast<std::int64_t>(scale.size()) != channels || static_cast<std::int64_t>(bias.size()) != channels ||
      static_cast<std::int64_t>(mean.size()) != channels || static_cast<std::int64_t>(var.size()) != channels)
    c.fail("per-channel parameters do not match channel count " + std::to_string(channels));
  std::int64_t spatial = 1;
  for (std::size_t d = 2; d < x.rank(); ++d) spatial *= x.shape[d];
  Tensor out(x.shape, x.type);
  for (std::int64_t n = 0; n < x.shape[0]; ++n) {
    for (std::int64_t ch = 0; ch < channels; ++ch) {
      const auto k = static_cast<std::size_t>(ch);
      const double a = scale.data[k] / std::sqrt(var.data[k] + eps);
      const double b = bias.data[k] - a * mean.data[k];
      const std::size_t base = static_cast<std::size_t>((n * channels + ch) * spatial);
      for (std::int64_t s = 0; s < spatial; ++s) out.data[base + static_cast<std::size_t>(s)] = a * x.data[base + static_cast<std::size_t>(s)] + b;
    }
  }
  return {out};
}

std::vector<Tensor> op_layer_norm(const OpContext& c) {
  const Tensor& x = c.in(0);
  const auto axis = static_cast<std::size_t>(normalize_axis(c, c.node.attrs.get_int("axis", -1), x.rank()));
  const double eps = c.node.attrs.get_float("epsilon", 1e-5);
  std::int64_t inner = 1;
  for (std::size_t d = axis; d < x.rank(); ++d) inner *= x.shape[d];
  const std::int64_t outer = inner == 0 ? 0 : element_count(x.shape) / inner;
  Shape inner_shape(x.shape.begin() + static_cast<std::ptrdiff_t>(axis), x.shape.end());
  Tensor normed(x.shape, x.type);
  Shape stat_shape = x.shape;
  for (std::size_t d = axis; d < stat_shape.size(); ++d) stat_shape[d] = 1;
  Tensor means(stat_shape, ElemType::float32), inv_std(stat_shape, ElemType::float32);
  for (std::int64_t o = 0; o < outer; ++o) {
    const double* src = x.data.data() + o * inner;
    double mean = 0;
    for (std::int64_t i = 0; i < inner; ++i) mean += src[i];
    mean /= static_cast<double>(inner);
    double var = 0;
    for (std::int64_t i = 0; i < inner; ++i) var += (src[i] - mean) * (src[i] - mean);
    var /= static_cast<double>(inner);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::int64_t i = 0; i < inner; ++i) normed.data[static_cast<std::size_t>(o * inner + i)] = (src[i] - mean) * inv;
    means.data[static_cast<std::size_t>(o)] = mean;
    inv_std.data[static_cast<std::size_t>(o)] = inv;
  }
  Tensor y = binary(c, normed, c.in(1), x.type, std::multiplies<>());
  if (c.has(2)) y = binary(c, y, c.in(2), x.type, std::plus<>());
  return {y, means, inv_std};
}

// ---------------------------------------------------------------- linear algebra

std::vector<Tensor> op_gemm(const OpContext& c) {
  const Tensor &a = c.in(0), &b = c.in(1);
  if (a.rank() != 2 || b.rank() != 2) c.fail("A and B must be 2D");
  const bool ta = c.node.attrs.get_int("transA", 0) != 0, tb = c.node.attrs.get_int("transB", 0) != 0;
  const double alpha = c.node.attrs.get_float("alpha", 1.0), beta = c.node.attrs.get_float("beta", 1.0);
  const auto M = ta ? a.shape[1] : a.shape[0], K = ta ? a.shape[0] : a.shape[1];
  const auto Kb = tb ? b.shape[1] : b.shape[0], N = tb ? b.shape[0] : b.shape[1];
  if (K != Kb) c.fail("inner dims differ: " + shape_str(a.shape) + " x " + shape_str(b.shape));
  Tensor out({M, N}, a.type);
  for (std::int64_t i = 0; i < M; ++i) {
    double* row = out.data.data() + i * N;
    for (std::int64_t k = 0; k < K; ++k) {
      const double av = ta ? a.data[static_cast<std::size_t>(k * M + i)] : a.data[static_cast<std::size_t>(i * K + k)];
      if (av == 0.0) continue;
      for (std::int64_t j = 0; j < N; ++j) {
        const double bv = tb ? b.data[static_cast<std::size_t>(j * K + k)] : b.data[static_cast<std::size_t>(k * N + j)];
        row[j] += av * bv;
      }
    }
  }
  if (alpha != 1.0)
    for (auto& v : out.data) v *= alpha;
  if (c.has(2)) {
    const Tensor& bias = c.in(2);
    Tensor scaled = unary(bias, [beta](double v) { return beta * v; });
    out = binary(c, out, scaled, out.type, std::plus<>());
    if (out.shape != Shape{M, N}) c.fail("C does not broadcast to (M,N)");
  }
  return {out};
}

std::vector<Tensor> op_matmul(const OpContext& c) {
  Tensor a = c.in(0), b = c.in(1);
  const bool a_vec = a.rank() == 1, b_vec = b.rank() == 1;
  if (a_vec) a.shape.insert(a.shape.begin(), 1);
  if (b_vec) b.shape.push_back(1);
  if (a.rank() < 2 || b.rank() < 2) c.fail("operands must have rank >= 1");
  const auto M = a.shape[a.rank() - 2], K = a.shape[a.rank() - 1];
  const auto Kb = b.shape[b.rank() - 2], N = b.shape[b.rank() - 1];
  if (K != Kb) c.fail("inner dims differ: " + shape_str(c.in(0).shape) + " x " + shape_str(c.in(1).shape));
  Shape a_batch(a.shape.begin(), a.shape.end() - 2), b_batch(b.shape.begin(), b.shape.end() - 2);
  const Shape batch = broadcast_shapes(c, {&a_batch, &b_batch});
  const std::array<Strides, 2> st{broadcast_strides(a_batch, batch), broadcast_strides(b_batch, batch)};
  Shape out_shape = batch;
  out_shape.push_back(M);
  out_shape.push_back(N);
  Tensor out(out_shape, a.type);
  const std::int64_t a_mat = M * K, b_mat = K * N, o_mat = M * N;
  auto kernel = [&](std::int64_t bi, const std::array<std::int64_t, 2>& o) {
    const double* pa = a.data.data() + o[0] * a_mat;
    const double* pb = b.data.data() + o[1] * b_mat;
    double* po = out.data.data() + bi * o_mat;
    for (std::int64_t i = 0; i < M; ++i)
      for (std::int64_t k = 0; k < K; ++k) {
        const double av = pa[i * K + k];
        for (std::int64_t j = 0; j < N; ++j) po[i * N + j] += av * pb[k * N + j];
      }
  };
  if (batch.empty()) kernel(0, {0, 0});
  else for_each_broadcast(batch, st, kernel);
  if (a_vec) out.shape.erase(out.shape.end() - 2);
  if (b_vec) out.shape.pop_back();
  return {out};
}

// ---------------------------------------------------------------- convolution / pooling

struct Window2D {
  std::array<std::int64_t, 2> kernel{1, 1}, stride{1, 1}, dilation{1, 1};
  std::array<std::int64_t, 4> pads{0, 0, 0, 0};  // top, left, bottom, right
  std::array<std::int64_t, 2> out{0, 0};
};

Window2D resolve_window(const OpContext& c, std::int64_t H, std::int64_t W, std::array<std::int64_t, 2> kernel,
                        bool ceil_mode) {
  Window2D w;
  w.kernel = kernel;
  const auto& at = c.node.attrs;
  auto strides = at.get_ints("strides", {1, 1});
  auto dil = at.get_ints("dilations", {1, 1});
  auto pads = at.get_ints("pads", {0, 0, 0, 0});
  if (strides.size() != 2 || dil.size() != 2 || pads.size() != 4) c.fail("only 2D windows are supported");
  w.stride = {strides[0], strides[1]};
  w.dilation = {dil[0], dil[1]};
  w.pads = {pads[0], pads[1], pads[2], pads[3]};
  const std::array<std::int64_t, 2> in{H, W};
  const std::string auto_pad = at.get_string("auto_pad", "NOTSET");
  for (int d = 0; d < 2; ++d) {
    const std::int64_t eff = w.dilation[d] * (w.kernel[d] - 1) + 1;
    if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
      w.out[d] = (in[d] + w.stride[d] - 1) / w.stride[d];
      const std::int64_t total = std::max<std::int64_t>(0, (w.out[d] - 1) * w.stride[d] + eff - in[d]);
      const std::int64_t small = total / 2, large = total - small;
      w.pads[d] = auto_pad == "SAME_UPPER" ? small : large;
      w.pads[d + 2] = auto_pad == "SAME_UPPER" ? large : small;
      continue;
    }
    if (auto_pad == "VALID") w.pads[d] = w.pads[d + 2] = 0;
    const std::int64_t span = in[d] + w.pads[d] + w.pads[d + 2] - eff;
    if (span < 0) c.fail("window larger than padded input");
    if (ceil_mode) {
      w.out[d] = (span + w.stride[d] - 1) / w.stride[d] + 1;
      if ((w.out[d] - 1) * w.stride[d] >= in[d] + w.pads[d]) --w.out[d];
    } else {
      w.out[d] = span / w.stride[d] + 1;
    }
  }
  return w;
}

std::vector<Tensor> op_conv(const OpContext& c) {
  const Tensor &x = c.in(0), &w = c.in(1);
  if (x.rank() != 4 || w.rank() != 4) c.fail("only 2D convolution (rank-4 tensors) is supported");
  const auto N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const auto M = w.shape[0], Cg = w.shape[1], kH = w.shape[2], kW = w.shape[3];
  const auto group = c.node.attrs.get_int("group", 1);
  if (group < 1 || C != Cg * group || M % group != 0)
    c.fail("channel/group mismatch: input " + shape_str(x.shape) + ", weight " + shape_str(w.shape) +
           ", group " + std::to_string(group));
  const auto ks = c.node.attrs.get_ints("kernel_shape", {kH, kW});
  if (ks.size() != 2 || ks[0] != kH || ks[1] != kW) c.fail("kernel_shape disagrees with weight shape");
  const auto win = resolve_window(c, H, W, {kH, kW}, false);
  const auto oH = win.out[0], oW = win.out[1];
  Tensor out({N, M, oH, oW}, x.type);
  const std::int64_t m_per_group = M / group;
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t m = 0; m < M; ++m) {
      const std::int64_t g = m / m_per_group;
      double* dst = out.data.data() + ((n * M + m) * oH) * oW;
      if (c.has(2)) std::fill(dst, dst + oH * oW, c.in(2).data.at(static_cast<std::size_t>(m)));
      for (std::int64_t cg = 0; cg < Cg; ++cg) {
        const double* src = x.data.data() + ((n * C + g * Cg + cg) * H) * W;
        const double* ker = w.data.data() + ((m * Cg + cg) * kH) * kW;
        for (std::int64_t ky = 0; ky < kH; ++ky) {
          for (std::int64_t kx = 0; kx < kW; ++kx) {
            const double kv = ker[ky * kW + kx];
            if (kv == 0.0) continue;
            for (std::int64_t oy = 0; oy < oH; ++oy) {
              const std::int64_t iy = oy * win.stride[0] - win.pads[0] + ky * win.dilation[0];
              if (iy < 0 || iy >= H) continue;
              const double* srow = src + iy * W;
              double* drow = dst + oy * oW;
              const std::int64_t xoff = kx * win.dilation[1] - win.pads[1];
              for (std::int64_t ox = 0; ox < oW; ++ox) {
                const std::int64_t ix = ox * win.stride[1] + xoff;
                if (ix >= 0 && ix < W) drow[ox] += kv * srow[ix];
              }
            }
          }
        }
      }
    }
  }
  return {out};
}

template <bool IsMax>
std::vector<Tensor> pool(const OpContext& c) {
  const Tensor& x = c.in(0);
  if (x.rank() != 4) c.fail("only 2D pooling (rank-4 tensors) is supported");
  const auto ks = c.node.attrs.get_ints("kernel_shape");
  if (ks.size() != 2) c.fail("kernel_shape must have 2 entries");
  const auto N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const auto win = resolve_window(c, H, W, {ks[0], ks[1]}, c.node.attrs.get_int("ceil_mode", 0) != 0);
  const bool include_pad = c.node.attrs.get_int("count_include_pad", 0) != 0;
  Tensor out({N, C, win.out[0], win.out[1]}, x.type);
  for (std::int64_t nc = 0; nc < N * C; ++nc) {
    const double* src = x.data.data() + nc * H * W;
    double* dst = out.data.data() + nc * win.out[0] * win.out[1];
    for (std::int64_t oy = 0; oy < win.out[0]; ++oy) {
      for (std::int64_t ox = 0; ox < win.out[1]; ++ox) {
        double acc = IsMax ? -std::numeric_limits<double>::infinity() : 0.0;
        std::int64_t n_in = 0, n_pad = 0;
        for (std::int64_t ky = 0; ky < ks[0]; ++ky) {
          const std::int64_t iy = oy * win.stride[0] - win.pads[0] + ky * win.dilation[0];
          for (std::int64_t kx = 0; kx < ks[1]; ++kx) {
            const std::int64_t ix = ox * win.stride[1] - win.pads[1] + kx * win.dilation[1];
            if (iy < 0 || iy >= H || ix < 0 || ix >= W) {
              // padded cells within the padded extent count for count_include_pad
              if (iy < H + win.pads[2] && ix < W + win.pads[3]) ++n_pad;
              continue;
            }
            const double v = src[iy * W + ix];
            if constexpr (IsMax) acc = std::max(acc, v);
            else acc += v;
            ++n_in;
          }
        }
        if constexpr (!IsMax) acc /= static_cast<double>(include_pad ? n_in + n_pad : std::max<std::int64_t>(n_in, 1));
        dst[oy * win.out[1] + ox] = acc;
      }
    }
  }
  return {out};
}

std::vector<Tensor> op_maxpool(const OpContext& c) {
  if (c.node.outputs.size() > 1 && !c.node.outputs[1].empty()) c.fail("Indices output is not supported");
  return pool<true>(c);
}
std::vector<Tensor> op_avgpool(const OpContext& c) { return pool<false>(c); }

template <bool IsMax>
std::vector<Tensor> global_pool(const OpContext& c) {
  const Tensor& x = c.in(0);
  if (x.rank() < 3) c.fail("input rank must be >= 3");
  std::int64_t spatial = 1;
  for (std::size_t d = 2; d < x.rank(); ++d) spatial *= x.shape[d];
  Shape shape = x.shape;
  for (std::size_t d = 2; d < shape.size(); ++d) shape[d] = 1;
  Tensor out(shape, x.type);
  for (std::int64_t nc = 0; nc < x.shape[0] * x.shape[1]; ++nc) {
    const double* src = x.data.data() + nc * spatial;
    double acc = IsMax ? -std::numeric_limits<double>::infinity() : 0.0;
    for (std::int64_t s = 0; s < spatial; ++s) acc = IsMax ? std::max(acc, src[s]) : acc + src[s];
    out.data[static_cast<std::size_t>(nc)] = IsMax ? acc : acc / static_cast<double>(spatial);
  }
  return {out};
}
std::vector<Tensor> op_global_avgpool(const OpContext& c) { return global_pool<false>(c); }
std::vector<Tensor> op_global_maxpool(const OpContext& c) { return global_pool<true>(c); }

// ---------------------------------------------------------------- reductions

enum class Reduce { mean, sum, max };

template <Reduce R>
std::vector<Tensor> reduce(const OpContext& c, bool axes_from_input) {
  const Tensor& x = c.in(0);
  std::vector<std::int64_t> axes =
      axes_from_input ? (c.has(1) ? as_ints(c.in(1)) : std::vector<std::int64_t>{}) : c.node.attrs.get_ints("axes");
  const bool keep = c.node.attrs.get_int("keepdims", 1) != 0;
  if (axes.empty()) {
    if (axes_from_input && c.node.attrs.get_int("noop_with_empty_axes", 0) != 0) return {x};
    axes.resize(x.rank());
    std::iota(axes.begin(), axes.end(), 0);
  }
  std::vector<bool> reduced(x.rank(), false);
  for (auto a : axes) reduced[static_cast<std::size_t>(normalize_axis(c, a, x.rank()))] = true;
  Shape kept = x.shape;
  for (std::size_t d = 0; d < kept.size(); ++d)
    if (reduced[d]) kept[d] = 1;
  Tensor out(kept, x.type);
  if (R == Reduce::max) std::fill(out.data.begin(), out.data.end(), -std::numeric_limits<double>::infinity());
  const std::array<Strides, 1> st{broadcast_strides(kept, x.shape)};
  for_each_broadcast(x.shape, st, [&](std::int64_t i, const std::array<std::int64_t, 1>& o) {
    double& acc = out.data[static_cast<std::size_t>(o[0])];
    const double v = x.data[static_cast<std::size_t>(i)];
    if constexpr (R == Reduce::max) acc = std::max(acc, v);
    else acc += v;
  });
  if constexpr (R == Reduce::mean) {
    const double n = static_cast<double>(element_count(x.shape)) / static_cast<double>(std::max<std::int64_t>(1, element_count(kept)));
    for (auto& v : out.data) v /= n;
  }
  if (!keep) {
    Shape squeezed;
    for (std::size_t d = 0; d < kept.size(); ++d)
      if (!reduced[d]) squeezed.push_back(kept[d]);
    out.shape = squeezed;
  }
  return {out};
}
std::vector<Tensor> op_reduce_mean(const OpContext& c) { return reduce<Reduce::mean>(c, c.opset >= 18); }
std::vector<Tensor> op_reduce_sum(const OpContext& c) { return reduce<Reduce::sum>(c, c.opset >= 13); }
std::vector<Tensor> op_reduce_max(const OpContext& c) { return reduce<Reduce::max>(c, c.opset >= 18); }

// ---------------------------------------------------------------- shape manipulation

std::vector<Tensor> op_flatten(const OpContext& c) {
  const Tensor& x = c.in(0);
  const auto r = static_cast<std::int64_t>(x.rank());
  auto axis = c.node.attrs.get_int("axis", 1);
  if (axis < -r || axis > r) c.fail("axis out of range");
  if (axis < 0) axis += r;
  std::int64_t outer = 1;
  for (std::int64_t d = 0; d < axis; ++d) outer *= x.shape[static_cast<std::size_t>(d)];
  Tensor out = x;
  out.shape = {outer, outer == 0 ? 0 : element_count(x.shape) / outer};
  return {out};
}

std::vector<Tensor> op_reshape(const OpContext& c) {
  const Tensor& x = c.in(0);
  auto target = c.opset < 5 ? c.node.attrs.get_ints("shape") : as_ints(c.in(1));
  const bool allowzero = c.node.attrs.get_int("allowzero", 0) != 0;
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] == 0 && !allowzero) {
      if (i >= x.rank()) c.fail("0 in shape refers past input rank");
      target[i] = x.shape[i];
    }
    if (target[i] == -1) {
      if (infer >= 0) c.fail("more than one -1 in shape");
      infer = static_cast<int>(i);
    } else {
      known *= target[i];
    }
  }
  const auto total = element_count(x.shape);
  if (infer >= 0) {
    if (known == 0 || total % known != 0) c.fail("cannot infer -1 in shape");
    target[static_cast<std::size_t>(infer)] = total / known;
  }
  if (element_count(target) != total)
    c.fail("cannot reshape " + shape_str(x.shape) + " to " + shape_str(target));
  Tensor out = x;
  out.shape = target;
  return {out};
}

std::vector<Tensor> op_transpose(const OpContext& c) {
  const Tensor& x = c.in(0);
  std::vector<std::int64_t> perm = c.node.attrs.get_ints("perm");
  if (perm.empty()) {
    perm.resize(x.rank());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::int64_t>(perm.size() - 1 - i);
  }
  if (perm.size() != x.rank()) c.fail("perm length does not match rank");
  Shape shape(x.rank());
  const auto in_st = strides_of(x.shape);
  Strides st(x.rank());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto p = static_cast<std::size_t>(normalize_axis(c, perm[i], x.rank()));
    shape[i] = x.shape[p];
    st[i] = in_st[p];
  }
  Tensor out(shape, x.type);
  const std::array<Strides, 1> s{st};
  for_each_broadcast(shape, s, [&](std::int64_t i, const std::array<std::int64_t, 1>& o) {
    out.data[static_cast<std::size_t>(i)] = x.data[static_cast<std::size_t>(o[0])];
  });
  return {out};
}

std::vector<Tensor> op_concat(const OpContext& c) {
  const Tensor& first = c.in(0);
  const auto axis = static_cast<std::size_t>(normalize_axis(c, c.node.attrs.get_int("axis", 0), first.rank()));
  Shape shape = first.shape;
  shape[axis] = 0;
  for (std::size_t i = 0; i < c.count(); ++i) {
    const Tensor& t = c.in(i);
    if (t.rank() != first.rank()) c.fail("inputs differ in rank");
    for (std::size_t d = 0; d < t.rank(); ++d)
      if (d != axis && t.shape[d] != first.shape[d]) c.fail("inputs differ off the concat axis");
    shape[axis] += t.shape[axis];
  }
  Tensor out(shape, first.type);
  std::int64_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= shape[d];
  std::int64_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  std::size_t pos = 0;
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < c.count(); ++i) {
      const Tensor& t = c.in(i);
      const std::int64_t chunk = t.shape[axis] * inner;
      const auto* src = t.data.data() + o * chunk;
      std::copy(src, src + chunk, out.data.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += static_cast<std::size_t>(chunk);
    }
  }
  return {out};
}

std::vector<Tensor> op_split(const OpContext& c) {
  const Tensor& x = c.in(0);
  const auto axis = static_cast<std::size_t>(normalize_axis(c, c.node.attrs.get_int("axis", 0), x.rank()));
  const std::size_t n_out = c.node.outputs.size();
  std::vector<std::int64_t> sizes = c.opset >= 13 ? (c.has(1) ? as_ints(c.in(1)) : std::vector<std::int64_t>{})
                                                  : c.node.attrs.get_ints("split");
  if (sizes.empty()) {
    const auto n = static_cast<std::int64_t>(n_out);
    const auto chunk = (x.shape[axis] + n - 1) / n;
    for (std::int64_t i = 0, left = x.shape[axis]; i < n; ++i, left -= chunk) sizes.push_back(std::min(chunk, left));
  }
  if (sizes.size() != n_out) c.fail("split sizes do not match output count");
  std::int64_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.shape[d];
  std::int64_t inner = 1;
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.shape[d];
  std::vector<Tensor> outs;
  std::int64_t start = 0;
  for (auto len : sizes) {
    Shape shape = x.shape;
    shape[axis] = len;
    Tensor t(shape, x.type);
    for (std::int64_t o = 0; o < outer; ++o) {
      const auto* src = x.data.data() + (o * x.shape[axis] + start) * inner;
      std::copy(src, src + len * inner, t.data.begin() + o * len * inner);
    }
    outs.push_back(std::move(t));
    start += len;
  }
  if (start != x.shape[axis]) c.fail("split sizes do not sum to the axis length");
  return outs;
}

std::vector<Tensor> op_unsqueeze(const OpContext& c) {
  const Tensor& x = c.in(0);
  auto axes = c.opset >= 13 ? as_ints(c.in(1)) : c.node.attrs.get_ints("axes");
  const auto out_rank = x.rank() + axes.size();
  std::vector<bool> inserted(out_rank, false);
  for (auto a : axes) inserted[static_cast<std::size_t>(normalize_axis(c, a, out_rank))] = true;
  Shape shape;
  std::size_t src = 0;
  for (std::size_t d = 0; d < out_rank; ++d) shape.push_back(inserted[d] ? 1 : x.shape.at(src++));
  Tensor out = x;
  out.shape = shape;
  return {out};
}

std::vector<Tensor> op_squeeze(const OpContext& c) {
  const Tensor& x = c.in(0);
  auto axes = c.opset >= 13 ? (c.has(1) ? as_ints(c.in(1)) : std::vector<std::int64_t>{}) : c.node.attrs.get_ints("axes");
  std::vector<bool> drop(x.rank(), false);
  if (axes.empty()) {
    for (std::size_t d = 0; d < x.rank(); ++d) drop[d] = x.shape[d] == 1;
  } else {
    for (auto a : axes) {
      const auto d = static_cast<std::size_t>(normalize_axis(c, a, x.rank()));
      if (x.shape[d] != 1) c.fail("cannot squeeze a non-unit axis");
      drop[d] = true;
    }
  }
  Shape shape;
  for (std::size_t d = 0; d < x.rank(); ++d)
    if (!drop[d]) shape.push_back(x.shape[d]);
  Tensor out = x;
  out.shape = shape;
  return {out};
}

std::vector<Tensor> op_shape(const OpContext& c) {
  const Tensor& x = c.in(0);
  const auto r = static_cast<std::int64_t>(x.rank());
  auto start = c.node.attrs.get_int("start", 0), end = c.node.attrs.get_int("end", r);
  if (start < 0) start += r;
  if (end < 0) end += r;
  start = std::clamp<std::int64_t>(start, 0, r);
  end = std::clamp<std::int64_t>(end, 0, r);
  Tensor out({std::max<std::int64_t>(0, end - start)}, ElemType::int64);
  for (std::int64_t i = start; i < end; ++i) out.data[static_cast<std::size_t>(i - start)] = static_cast<double>(x.shape[static_cast<std::size_t>(i)]);
  return {out};
}

std::vector<Tensor> op_gather(const OpContext& c) {
  const Tensor &x = c.in(0), &idx = c.in(1);
  const auto axis = static_cast<std::size_t>(normalize_axis(c, c.node.attrs.get_int("axis", 0), x.rank()));
  Shape shape(x.shape.begin(), x.shape.begin() + static_cast<std::ptrdiff_t>(axis));
  shape.insert(shape.end(), idx.shape.begin(), idx.shape.end());
  shape.insert(shape.end(), x.shape.begin() + static_cast<std::ptrdiff_t>(axis) + 1, x.shape.end());
  std::int64_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.shape[d];
  std::int64_t inner = 1;
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.shape[d];
  const auto len = x.shape[axis];
  Tensor out(shape, x.type);
  std::size_t pos = 0;
  for (std::int64_t o = 0; o < outer; ++o) {
    for (double iv : idx.data) {
      auto i = static_cast<std::int64_t>(iv);
      if (i < 0) i += len;
      if (i < 0 || i >= len) c.fail("index out of range");
      const auto* src = x.data.data() + (o * len + i) * inner;
      std::copy(src, src + inner, out.data.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += static_cast<std::size_t>(inner);
    }
  }
  return {out};
}

std::vector<Tensor> op_slice(const OpContext& c) {
  const Tensor& x = c.in(0);
  std::vector<std::int64_t> starts, ends, axes, steps;
  if (c.opset < 10) {
    starts = c.node.attrs.get_ints("starts");
    ends = c.node.attrs.get_ints("ends");
    axes = c.node.attrs.get_ints("axes");
  } else {
    starts = as_ints(c.in(1));
    ends = as_ints(c.in(2));
    if (c.has(3)) axes = as_ints(c.in(3));
    if (c.has(4)) steps = as_ints(c.in(4));
  }
  if (axes.empty()) {
    axes.resize(starts.size());
    std::iota(axes.begin(), axes.end(), 0);
  }
  if (steps.empty()) steps.assign(starts.size(), 1);
  if (ends.size() != starts.size() || axes.size() != starts.size() || steps.size() != starts.size())
    c.fail("starts/ends/axes/steps lengths differ");
  const auto rank = x.rank();
  std::vector<std::int64_t> begin(rank, 0), step(rank, 1);
  Shape shape = x.shape;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto d = static_cast<std::size_t>(normalize_axis(c, axes[i], rank));
    const auto dim = x.shape[d];
    const auto s = steps[i];
    if (s == 0) c.fail("step must be nonzero");
    auto st = starts[i], en = ends[i];
    if (st < 0) st += dim;
    if (en < 0) en += dim;
    if (s > 0) {
      st = std::clamp<std::int64_t>(st, 0, dim);
      en = std::clamp<std::int64_t>(en, 0, dim);
      shape[d] = en > st ? (en - st + s - 1) / s : 0;
    } else {
      st = std::clamp<std::int64_t>(st, 0, dim - 1);
      en = std::clamp<std::int64_t>(en, -1, dim - 1);
      shape[d] = st > en ? (st - en - s - 1) / -s : 0;
    }
    begin[d] = st;
    step[d] = s;
  }
  const auto in_st = strides_of(x.shape);
  Strides st(rank);
  std::int64_t base = 0;
  for (std::size_t d = 0; d < rank; ++d) {
    st[d] = in_st[d] * step[d];
    base += begin[d] * in_st[d];
  }
  Tensor out(shape, x.type);
  const std::array<Strides, 1> s{st};
  for_each_broadcast(shape, s, [&](std::int64_t i, const std::array<std::int64_t, 1>& o) {
    out.data[static_cast<std::size_t>(i)] = x.data[static_cast<std::size_t>(base + o[0])];
  });
  return {out};
}

std::vector<Tensor> op_expand(const OpContext& c) {
  const Tensor& x = c.in(0);
  const Shape target = as_ints(c.in(1));
  const Shape shape = broadcast_shapes(c, {&x.shape, &target});
  Tensor out(shape, x.type);
  const std::array<Strides, 1> st{broadcast_strides(x.shape, shape)};
  for_each_broadcast(shape, st, [&](std::int64_t i, const std::array<std::int64_t, 1>& o) {
    out.data[static_cast<std::size_t>(i)] = x.data[static_cast<std::size_t>(o[0])];
  });
  return {out};
}

std::vector<Tensor> op_constant(const OpContext& c) {
  const auto& at = c.node.attrs;
  if (const auto* a = at.find("value"); a && a->t) return {*a->t};
  if (const auto* a = at.find("value_float")) return {Tensor({}, {a->f}, ElemType::float32)};
  if (const auto* a = at.find("value_int")) return {Tensor({}, {static_cast<double>(a->i)}, ElemType::int64)};
  if (const auto* a = at.find("value_floats"))
    return {Tensor({static_cast<std::int64_t>(a->floats.size())}, a->floats, ElemType::float32)};
  if (const auto* a = at.find("value_ints")) {
    std::vector<double> v(a->ints.begin(), a->ints.end());
    return {Tensor({static_cast<std::int64_t>(v.size())}, v, ElemType::int64)};
  }
  c.fail("no supported value attribute");
}

std::vector<Tensor> op_constant_of_shape(const OpContext& c) {
  const Shape shape = as_ints(c.in(0));
  double fill = 0.0;
  ElemType type = ElemType::float32;
  if (const auto* a = c.node.attrs.find("value"); a && a->t) {
    fill = a->t->data.at(0);
    type = a->t->type;
  }
  Tensor out(shape, type);
  std::fill(out.data.begin(), out.data.end(), fill);
  return {out};
}

std::vector<Tensor> op_range(const OpContext& c) {
  const double start = c.in(0).data.at(0), limit = c.in(1).data.at(0), delta = c.in(2).data.at(0);
  if (delta == 0) c.fail("delta must be nonzero");
  const auto n = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((limit - start) / delta)));
  Tensor out({n}, c.in(0).type);
  for (std::int64_t i = 0; i < n; ++i) out.data[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * delta;
  return {out};
}

const std::map<std::string, Kernel>& registry() {
  static const std::map<std::string, Kernel> table = {
      {"Abs", op_abs},
      {"Add", op_add},
      {"AveragePool", op_avgpool},
      {"BatchNormalization", op_batch_norm},
      {"Cast", op_cast},
      {"Clip", op_clip},
      {"Concat", op_concat},
      {"Constant", op_constant},
      {"ConstantOfShape", op_constant_of_shape},
      {"Conv", op_conv},
      {"Div", op_div},
      {"Dropout", op_dropout},
      {"Equal", op_equal},
      {"Erf", op_erf},
      {"Exp", op_exp},
      {"Expand", op_expand},
      {"Flatten", op_flatten},
      {"Gather", op_gather},
      {"Gelu", op_gelu},
      {"Gemm", op_gemm},
      {"GlobalAveragePool", op_global_avgpool},
      {"GlobalMaxPool", op_global_maxpool},
      {"Greater", op_greater},
      {"HardSigmoid", op_hard_sigmoid},
      {"HardSwish", op_hard_swish},
      {"Identity", op_identity},
      {"LayerNormalization", op_layer_norm},
      {"LeakyRelu", op_leaky_relu},
      {"Less", op_less},
      {"Log", op_log},
      {"MatMul", op_matmul},
      {"Max", op_max},
      {"MaxPool", op_maxpool},
      {"Min", op_min},
      {"Mul", op_mul},
      {"Neg", op_neg},
      {"Pow", op_pow},
      {"Range", op_range},
      {"Reciprocal", op_reciprocal},
      {"ReduceMax", op_reduce_max},
      {"ReduceMean", op_reduce_mean},
      {"ReduceSum", op_reduce_sum},
      {"Relu", op_relu},
      {"Reshape", op_reshape},
      {"Shape", op_shape},
      {"Sigmoid", op_sigmoid},
      {"Slice", op_slice},
      {"Softmax", op_softmax},
      {"Split", op_split},
      {"Sqrt", op_sqrt},
      {"Squeeze", op_squeeze},
      {"Sub", op_sub},
      {"Sum", op_sum},
      {"Tanh", op_tanh},
      {"Transpose", op_transpose},
      {"Unsqueeze", op_unsqueeze},
      {"Where", op_where},
  };
  return table;
}

}  // namespace

Kernel find_kernel(const std::string& op_type) {
  const auto& table = registry();
  auto it = table.find(op_type);
  return it == table.end() ? nullptr : it->second;
}

std::vector<std::string> kernel_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

}  // namespace cmrqa::onnx
