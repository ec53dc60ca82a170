#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

#include "har/tensor.hpp"

namespace har {

// Split (..., C) along the last axis into consecutive groups of the given widths.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, std::span<const std::size_t> widths) {
  require(x.rank() >= 1, "split_channels: scalar input");
  const std::size_t c = x.shape().back();
  std::size_t total = 0;
  for (auto w : widths) total += w;
  require(total == c, "split_channels: widths sum to " + std::to_string(total) + ", input has " +
                          std::to_string(c) + " channels");
  const std::size_t rows = c ? x.size() / c : 0;
  std::vector<Tensor<T>> out;
  std::size_t offset = 0;
  for (auto w : widths) {
    Shape s = x.shape();
    s.back() = w;
    Tensor<T> part(s);
    for (std::size_t r = 0; r < rows; ++r)
      std::memcpy(part.data() + r * w, x.data() + r * c + offset, w * sizeof(T));
    out.push_back(std::move(part));
    offset += w;
  }
  return out;
}

// Concatenate along the last axis; all leading dimensions must agree.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
  require(!parts.empty(), "concat_channels: nothing to concatenate");
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::size_t c = 0;
  for (const auto& p : parts) {
    Shape l = p.shape();
    l.pop_back();
    require(l == lead, "concat_channels: leading shapes differ: " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(p.shape()));
    c += p.shape().back();
  }
  Shape s = lead;
  s.push_back(c);
  Tensor<T> out(s);
  const std::size_t rows = shape_numel(lead);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.shape().back();
    for (std::size_t r = 0; r < rows; ++r)
      std::memcpy(out.data() + r * c + offset, p.data() + r * w, w * sizeof(T));
    offset += w;
  }
  return out;
}

// Gather whole rows (leading-axis entries) in the given order.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, std::span<const std::size_t> rows) {
  const std::size_t stride = x.dim(0) ? x.size() / x.dim(0) : 0;
  Shape s = x.shape();
  s[0] = rows.size();
  Tensor<T> out(s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < x.dim(0), "gather_rows: index out of range");
    std::memcpy(out.data() + i * stride, x.data() + rows[i] * stride, stride * sizeof(T));
  }
  return out;
}

}  // namespace har
