#pragma once

#include <cmath>
#include <cstddef>

#include "har/rng.hpp"
#include "har/tensor.hpp"

namespace har::nn {

inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
void glorot_uniform(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double lim = glorot_limit(fan_in, fan_out);
  for (auto& v : w.values()) v = static_cast<T>(uniform(rng, -lim, lim));
}

}  // namespace har::nn
