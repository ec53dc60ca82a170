#pragma once

#include <cstddef>
#include <string>

#include "har/tensor.hpp"

namespace har::nn::detail {

struct SeqDims {
  std::size_t batch, length, channels;
};

template <typename T>
SeqDims seq_dims(const Tensor<T>& x, const char* who) {
  if (x.rank() == 2) return {1, x.dim(0), x.dim(1)};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw ShapeError(std::string(who) + ": expected (L, C) or (B, L, C), got " + shape_str(x.shape()));
}

template <typename T>
Shape seq_shape(const Tensor<T>& like, SeqDims d) {
  return like.rank() == 2 ? Shape{d.length, d.channels} : Shape{d.batch, d.length, d.channels};
}

}  // namespace har::nn::detail
