#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "har/tensor.hpp"

namespace har::nn {

inline constexpr double kLogClamp = 1e-12;

template <typename T>
struct SoftmaxCrossEntropy {
  std::vector<double> loss;  // one entry per row
  Tensor<T> grad_logits;     // probs - onehot, per row (not averaged)
  Tensor<T> probs;

  double mean_loss() const {
    double s = 0.0;
    for (double l : loss) s += l;
    return loss.empty() ? 0.0 : s / static_cast<double>(loss.size());
  }
};

// Max-shifted softmax per row. Logits may be (K) or (B, K).
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> p(logits.shape());
  const std::size_t k = logits.shape().back(), rows = logits.size() / k;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* z = logits.data() + r * k;
    T* out = p.data() + r * k;
    const T mx = *std::max_element(z, z + k);
    T sum{0};
    for (std::size_t j = 0; j < k; ++j) sum += out[j] = std::exp(z[j] - mx);
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  return p;
}

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits, const Tensor<T>& onehot) {
  require(logits.shape() == onehot.shape(), "softmax_cross_entropy: logits " +
                                                shape_str(logits.shape()) + " vs targets " +
                                                shape_str(onehot.shape()));
  SoftmaxCrossEntropy<T> r;
  r.probs = softmax(logits);
  r.grad_logits = Tensor<T>(logits.shape());
  const std::size_t k = logits.shape().back(), rows = logits.size() / k;
  r.loss.resize(rows);
  for (std::size_t row = 0; row < rows; ++row) {
    double l = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = row * k + j;
      if (onehot[i] != T{0})
        l -= static_cast<double>(onehot[i]) *
             std::log(std::max(static_cast<double>(r.probs[i]), kLogClamp));
      r.grad_logits[i] = r.probs[i] - onehot[i];
    }
    r.loss[row] = l;
  }
  return r;
}

}  // namespace har::nn
