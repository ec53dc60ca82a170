#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "har/nn/seq.hpp"

namespace har::nn {

struct PoolConfig {
  std::size_t size = 2;
  std::size_t stride = 1;

  std::size_t output_length(std::size_t length) const {
    return length < size ? 0 : (length - size) / stride + 1;
  }
};

// Winning input timestep for every output element, plus the input shape for backward.
struct PoolCache {
  Shape input_shape;
  Shape output_shape;
  std::vector<std::uint32_t> argmax;
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  PoolCache cache;
};

// out[t, c] = max over x[t*stride .. t*stride + size, c]; ties go to the earlier timestep.
template <typename T>
PoolResult<T> maxpool_forward(const Tensor<T>& x, PoolConfig cfg = {}) {
  const auto d = detail::seq_dims(x, "maxpool_forward");
  require(cfg.size >= 1 && cfg.stride >= 1, "maxpool_forward: size and stride must be positive");
  require(d.length >= cfg.size, "maxpool_forward: sequence length " + std::to_string(d.length) +
                                    " shorter than pool size " + std::to_string(cfg.size));
  const std::size_t out_len = cfg.output_length(d.length), c = d.channels;
  PoolResult<T> r;
  r.output = Tensor<T>(detail::seq_shape(x, {d.batch, out_len, c}));
  r.cache.input_shape = x.shape();
  r.cache.output_shape = r.output.shape();
  r.cache.argmax.resize(r.output.size());
  for (std::size_t n = 0; n < d.batch; ++n) {
    const T* xb = x.data() + n * d.length * c;
    T* yb = r.output.data() + n * out_len * c;
    std::uint32_t* ab = r.cache.argmax.data() + n * out_len * c;
    for (std::size_t t = 0; t < out_len; ++t) {
      const std::size_t start = t * cfg.stride;
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = start;
        T v = xb[start * c + ch];
        for (std::size_t j = start + 1; j < start + cfg.size; ++j) {
          if (xb[j * c + ch] > v) {
            v = xb[j * c + ch];
            best = j;
          }
        }
        yb[t * c + ch] = v;
        ab[t * c + ch] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

// Routes each upstream element to its winning position; overlapping windows accumulate.
template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& grad_out, const PoolCache& cache) {
  require(grad_out.shape() == cache.output_shape,
          "maxpool_backward: grad_out shape " + shape_str(grad_out.shape()) +
              " does not match cached output " + shape_str(cache.output_shape));
  Tensor<T> gx(cache.input_shape);
  const auto in = detail::seq_dims(gx, "maxpool_backward");
  const auto out = detail::seq_dims(grad_out, "maxpool_backward");
  const std::size_t c = in.channels;
  for (std::size_t n = 0; n < in.batch; ++n) {
    const T* gb = grad_out.data() + n * out.length * c;
    const std::uint32_t* ab = cache.argmax.data() + n * out.length * c;
    T* xb = gx.data() + n * in.length * c;
    for (std::size_t i = 0; i < out.length * c; ++i) xb[ab[i] * c + i % c] += gb[i];
  }
  return gx;
}

}  // namespace har::nn
