#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/tensor.hpp"

namespace har::nn {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t t = 0;

  AdamState() = default;
  explicit AdamState(const std::vector<const Tensor<T>*>& params) {
    for (const auto* p : params) {
      m.emplace_back(p->shape());
      v.emplace_back(p->shape());
    }
  }
};

// One bias-corrected step over all parameter tensors. Throws before touching any parameter
// if a gradient is non-finite.
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& state, const AdamConfig& cfg) {
  require(params.size() == grads.size() && params.size() == state.m.size(),
          "adam_step: parameter, gradient and state counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i]->shape() == grads[i]->shape() && params[i]->shape() == state.m[i].shape(),
            "adam_step: shape mismatch for tensor " + std::to_string(i));
    if (!grads[i]->all_finite())
      throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(i));
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T one_b1 = static_cast<T>(1.0 - cfg.beta1), one_b2 = static_cast<T>(1.0 - cfg.beta2);
  const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);
  const T lr = static_cast<T>(cfg.lr), eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    T* theta = params[i]->data();
    const T* g = grads[i]->data();
    T* m = state.m[i].data();
    T* v = state.v[i].data();
    for (std::size_t j = 0, n = params[i]->size(); j < n; ++j) {
      m[j] = b1 * m[j] + one_b1 * g[j];
      v[j] = b2 * v[j] + one_b2 * g[j] * g[j];
      theta[j] -= lr * (m[j] * inv_c1) / (std::sqrt(v[j] * inv_c2) + eps);
    }
  }
}

}  // namespace har::nn
