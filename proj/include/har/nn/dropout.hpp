#pragma once

#include "har/rng.hpp"
#include "har/tensor.hpp"

namespace har::nn {

enum class Mode { train, eval };

struct DropoutConfig {
  double rate = 0.3;
};

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> mask;  // per-element scale (0 or 1/(1-rate)); empty in eval mode
};

// Inverted dropout: survivors are rescaled at train time so eval mode is the identity.
template <typename T>
DropoutResult<T> dropout_apply(const Tensor<T>& x, DropoutConfig cfg, Mode mode, Rng* rng) {
  require(cfg.rate >= 0.0 && cfg.rate < 1.0, "dropout: rate must lie in [0, 1)");
  DropoutResult<T> r;
  if (mode == Mode::eval || cfg.rate == 0.0) {
    r.output = x;
    return r;
  }
  require(rng != nullptr, "dropout: train mode requires an RNG stream");
  const T scale = static_cast<T>(1.0 / (1.0 - cfg.rate));
  r.mask = Tensor<T>(x.shape());
  r.output = Tensor<T>(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.mask[i] = uniform01(*rng) < cfg.rate ? T{0} : scale;
    r.output[i] = x[i] * r.mask[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const Tensor<T>& mask) {
  if (mask.empty()) return grad_out;
  require(grad_out.shape() == mask.shape(), "dropout_backward: shape mismatch");
  Tensor<T> g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * mask[i];
  return g;
}

}  // namespace har::nn
