#pragma once

// Valid 1-D convolution (cross-correlation, stride 1) over (batch, time, channel) tensors.

#include <cstddef>

#include "har/nn/seq.hpp"

namespace har::nn {

template <typename T>
struct Conv1dParams {
  Tensor<T> weight;  // (kernel, in_channels, out_channels)
  Tensor<T> bias;    // (out_channels)

  Conv1dParams() = default;
  Conv1dParams(std::size_t kernel, std::size_t in_channels, std::size_t out_channels)
      : weight({kernel, in_channels, out_channels}), bias({out_channels}) {}

  std::size_t kernel() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(2); }
};

template <typename T>
struct Conv1dGrads {
  Tensor<T> input;  // empty when not requested
  Tensor<T> weight;
  Tensor<T> bias;
};

namespace detail {

// Row t of the result is x[t .. t+kernel) flattened, read in place with row stride `channels`.
template <typename T>
auto unfold(const T* x, std::size_t out_len, std::size_t kernel, std::size_t channels) {
  using View = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;
  return View(x, static_cast<Eigen::Index>(out_len), static_cast<Eigen::Index>(kernel * channels),
              Eigen::OuterStride<>(static_cast<Eigen::Index>(channels)));
}

}  // namespace detail

// out[b, t, o] = bias[o] + sum_{k, c} x[b, t + k, c] * weight[k, c, o]
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& x, const Conv1dParams<T>& p) {
  const auto d = detail::seq_dims(x, "conv1d_forward");
  const std::size_t k = p.kernel(), cin = p.in_channels(), cout = p.out_channels();
  require(d.channels == cin, "conv1d_forward: input has " + std::to_string(d.channels) +
                                 " channels, layer expects " + std::to_string(cin));
  require(d.length >= k, "conv1d_forward: sequence length " + std::to_string(d.length) +
                             " shorter than kernel " + std::to_string(k));
  const std::size_t out_len = d.length - k + 1;
  Tensor<T> out(detail::seq_shape(x, {d.batch, out_len, cout}));
  const auto w = as_matrix(p.weight.data(), k * cin, cout);
  const auto b = ConstRowVecMap<T>(p.bias.data(), static_cast<Eigen::Index>(cout));
  for (std::size_t n = 0; n < d.batch; ++n) {
    auto y = as_matrix(out.data() + n * out_len * cout, out_len, cout);
    y.noalias() = detail::unfold(x.data() + n * d.length * cin, out_len, k, cin) * w;
    y.rowwise() += b;
  }
  return out;
}

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                               const Conv1dParams<T>& p, bool want_input_grad = true) {
  const auto d = detail::seq_dims(x, "conv1d_backward");
  const std::size_t k = p.kernel(), cin = p.in_channels(), cout = p.out_channels();
  require(d.channels == cin && d.length >= k, "conv1d_backward: input does not match layer");
  const std::size_t out_len = d.length - k + 1;
  require(grad_out.shape() == detail::seq_shape(x, {d.batch, out_len, cout}),
          "conv1d_backward: grad_out shape " + shape_str(grad_out.shape()) +
              " does not match forward output");

  Conv1dGrads<T> g;
  g.weight = Tensor<T>(p.weight.shape());
  g.bias = Tensor<T>(p.bias.shape());
  if (want_input_grad) g.input = Tensor<T>(x.shape());

  auto gw = as_matrix(g.weight.data(), k * cin, cout);
  const auto w = as_matrix(p.weight.data(), k * cin, cout);
  for (std::size_t n = 0; n < d.batch; ++n) {
    const auto go = as_matrix(grad_out.data() + n * out_len * cout, out_len, cout);
    gw.noalias() += detail::unfold(x.data() + n * d.length * cin, out_len, k, cin).transpose() * go;
    accumulate_column_sums(go, g.bias.data());
    if (want_input_grad) {
      T* gx = g.input.data() + n * d.length * cin;
      for (std::size_t tap = 0; tap < k; ++tap) {
        as_matrix(gx + tap * cin, out_len, cin).noalias() +=
            go * w.middleRows(static_cast<Eigen::Index>(tap * cin), static_cast<Eigen::Index>(cin))
                     .transpose();
      }
    }
  }
  return g;
}

}  // namespace har::nn
