#pragma once

// Brute-force k-nearest-neighbours over engineered feature vectors.
//
// Neighbours are ranked by squared Euclidean distance (same order as true distance),
// equal distances by lower training-row index. The vote picks the most frequent class;
// a tie between classes goes to whichever tied class appears first in neighbour order.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "har/tensor.hpp"

namespace har::knn {

struct Neighbor {
  double dist2;
  std::size_t index;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
};

inline double squared_distance(const float* a, const float* b, std::size_t n) {
  // Fixed lane split keeps the sum order, and thus the result, independent of the compiler.
  std::array<double, 8> acc{};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t l = 0; l < 8; ++l) {
      const double d = static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
      acc[l] += d * d;
    }
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc[0] += d * d;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Picks the winning class among the first `k` neighbours.
inline int vote(std::span<const Neighbor> ranked, std::size_t k, std::span<const int> labels,
                std::size_t num_classes) {
  std::vector<std::size_t> count(num_classes, 0);
  std::vector<std::size_t> first_seen(num_classes, k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto c = static_cast<std::size_t>(labels[ranked[r].index]);
    if (count[c]++ == 0) first_seen[c] = r;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < num_classes; ++c)
    if (count[c] > count[best] || (count[c] == count[best] && first_seen[c] < first_seen[best]))
      best = c;
  return static_cast<int>(best);
}

class KnnModel {
 public:
  KnnModel(Tensorf train_features, std::vector<int> train_labels, std::size_t k,
           std::size_t num_classes = 6)
      : features_(std::move(train_features)), labels_(std::move(train_labels)), k_(k),
        classes_(num_classes) {
    require(features_.rank() == 2, "knn: training features must be (N, F)");
    require(features_.dim(0) == labels_.size(), "knn: feature rows and labels differ");
    require(k_ >= 1 && k_ <= labels_.size(),
            "knn: k must lie in [1, " + std::to_string(labels_.size()) + "]");
    require(features_.all_finite(), "knn: non-finite training feature");
    for (int l : labels_)
      require(l >= 0 && static_cast<std::size_t>(l) < classes_, "knn: label out of range");
  }

  std::size_t k() const { return k_; }
  std::size_t rows() const { return labels_.size(); }
  std::size_t dims() const { return features_.dim(1); }
  std::size_t classes() const { return classes_; }
  const std::vector<int>& labels() const { return labels_; }

  // The `count` nearest training rows, ordered.
  std::vector<Neighbor> nearest(std::span<const float> query, std::size_t count) const {
    require(query.size() == dims(), "knn: query has " + std::to_string(query.size()) +
                                        " features, model has " + std::to_string(dims()));
    count = std::min(count, rows());
    std::vector<Neighbor> all(rows());
    for (std::size_t i = 0; i < rows(); ++i)
      all[i] = {squared_distance(query.data(), features_.data() + i * dims(), dims()), i};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count), all.end());
    all.resize(count);
    return all;
  }

  int predict(std::span<const float> query) const {
    const auto nb = nearest(query, k_);
    return vote(nb, k_, labels_, classes_);
  }

  std::vector<int> predict_all(const Tensorf& queries) const {
    require(queries.rank() == 2 && queries.dim(1) == dims(), "knn: query table shape mismatch");
    std::vector<int> out(queries.dim(0));
    for (std::size_t q = 0; q < out.size(); ++q)
      out[q] = predict(std::span<const float>(queries.data() + q * dims(), dims()));
    return out;
  }

 private:
  Tensorf features_;
  std::vector<int> labels_;
  std::size_t k_;
  std::size_t classes_;
};

struct SweepPoint {
  std::size_t k;
  double error;
};

// Test error for every k in [k_lo, k_hi]; one neighbour search per query covers all k.
inline std::vector<SweepPoint> error_sweep(const Tensorf& train, const std::vector<int>& train_labels,
                                           const Tensorf& test, const std::vector<int>& test_labels,
                                           std::size_t k_lo, std::size_t k_hi,
                                           std::size_t num_classes = 6) {
  if (k_lo < 1 || k_lo > k_hi)
    throw std::invalid_argument("knn sweep: empty or invalid k range " + std::to_string(k_lo) +
                                ":" + std::to_string(k_hi));
  require(test.rank() == 2 && test.dim(0) == test_labels.size(), "knn sweep: test table mismatch");
  require(!test_labels.empty(), "knn sweep: empty test table");
  const KnnModel model(train, train_labels, k_hi, num_classes);
  std::vector<std::size_t> wrong(k_hi - k_lo + 1, 0);
  for (std::size_t q = 0; q < test_labels.size(); ++q) {
    const auto nb = model.nearest(std::span<const float>(test.data() + q * test.dim(1), test.dim(1)), k_hi);
    for (std::size_t k = k_lo; k <= k_hi; ++k)
      if (vote(nb, k, train_labels, num_classes) != test_labels[q]) ++wrong[k - k_lo];
  }
  std::vector<SweepPoint> out;
  for (std::size_t k = k_lo; k <= k_hi; ++k)
    out.push_back({k, static_cast<double>(wrong[k - k_lo]) / static_cast<double>(test_labels.size())});
  return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& pts) {
  std::string out = "k,error\n";
  char buf[64];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", p.k, p.error);
    out += buf;
  }
  return out;
}

}  // namespace har::knn
