#pragma once

#include <cstddef>

#include "har/tensor.hpp"

namespace har::nn {

template <typename T>
struct DenseParams {
  Tensor<T> weight;  // (in_dim, out_dim)
  Tensor<T> bias;    // (out_dim)

  DenseParams() = default;
  DenseParams(std::size_t in_dim, std::size_t out_dim) : weight({in_dim, out_dim}), bias({out_dim}) {}

  std::size_t in_dim() const { return weight.dim(0); }
  std::size_t out_dim() const { return weight.dim(1); }
};

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

// y = x W + b for x of shape (D_in) or (B, D_in).
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const DenseParams<T>& p) {
  require((x.rank() == 1 || x.rank() == 2) && x.shape().back() == p.in_dim(),
          "dense_forward: input " + shape_str(x.shape()) + " does not match layer " +
              shape_str(p.weight.shape()));
  const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
  Tensor<T> y(x.rank() == 1 ? Shape{p.out_dim()} : Shape{rows, p.out_dim()});
  auto ym = as_matrix(y.data(), rows, p.out_dim());
  ym.noalias() = as_matrix(x.data(), rows, p.in_dim()) * as_matrix(p.weight);
  ym.rowwise() += ConstRowVecMap<T>(p.bias.data(), static_cast<Eigen::Index>(p.out_dim()));
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                             const DenseParams<T>& p, bool want_input_grad = true) {
  const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
  require(x.shape().back() == p.in_dim() && grad_out.size() == rows * p.out_dim(),
          "dense_backward: grad_out " + shape_str(grad_out.shape()) + " does not match layer");
  const auto g = as_matrix(grad_out.data(), rows, p.out_dim());
  const auto xm = as_matrix(x.data(), rows, p.in_dim());
  DenseGrads<T> r;
  r.weight = Tensor<T>(p.weight.shape());
  as_matrix(r.weight).noalias() = xm.transpose() * g;
  r.bias = Tensor<T>(p.bias.shape());
  accumulate_column_sums(g, r.bias.data());
  if (want_input_grad) {
    r.input = Tensor<T>(x.shape());
    as_matrix(r.input.data(), rows, p.in_dim()).noalias() = g * as_matrix(p.weight).transpose();
  }
  return r;
}

}  // namespace har::nn
