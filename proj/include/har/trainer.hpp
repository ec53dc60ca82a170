#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/io.hpp"
#include "har/model.hpp"
#include "har/nn/adam.hpp"

namespace har {

struct LabeledWindows {
  Tensorf x;           // (N, L, C), standardized
  std::vector<int> y;  // zero-based classes

  std::size_t size() const { return y.size(); }
};

struct TrainConfig {
  std::size_t epochs = 17;
  std::size_t batch_size = 32;
  nn::AdamConfig adam{};
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::size_t eval_batch = 128;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;  // mean of per-batch mean losses during the epoch
  double train_acc = 0;   // eval-mode accuracy on the training split after the epoch
  double test_loss = 0;
  double test_acc = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;

  std::string to_csv() const {
    std::string out = "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const auto& e : epochs)
      out += std::to_string(e.epoch) + "," + io::fixed(e.train_loss) + "," +
             io::fixed(e.train_acc) + "," + io::fixed(e.test_loss) + "," + io::fixed(e.test_acc) +
             "\n";
    return out;
  }
};

struct EvalResult {
  double mean_loss = 0;
  double accuracy = 0;
  std::vector<int> predictions;
};

inline Tensorf onehot(std::span<const int> classes, std::size_t num_classes) {
  Tensorf t({classes.size(), num_classes});
  for (std::size_t i = 0; i < classes.size(); ++i) t(i, static_cast<std::size_t>(classes[i])) = 1.0f;
  return t;
}

inline std::size_t batches_per_epoch(std::size_t n, std::size_t batch) {
  return (n + batch - 1) / batch;
}

// Eval-mode loss and accuracy; windows are processed in index order.
inline EvalResult evaluate(const Model<float>& model, const LabeledWindows& data,
                           std::size_t batch = 128) {
  require(data.x.rank() == 3 && data.x.dim(0) == data.size(), "evaluate: windows/labels mismatch");
  EvalResult r;
  r.predictions.reserve(data.size());
  double loss_sum = 0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const std::size_t end = std::min(start + batch, data.size());
    const Tensorf xb = data.x.slice_rows(start, end);
    const std::span<const int> yb(data.y.data() + start, end - start);
    auto f = model.forward(xb);
    auto ce = nn::softmax_cross_entropy(f.logits, onehot(yb, model.spec().num_classes));
    for (double l : ce.loss) loss_sum += l;
    for (std::size_t i = 0; i < yb.size(); ++i) {
      const float* p = f.probs.data() + i * model.spec().num_classes;
      const int pred = static_cast<int>(std::max_element(p, p + model.spec().num_classes) - p);
      r.predictions.push_back(pred);
      correct += pred == yb[i];
    }
  }
  const auto n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
  r.mean_loss = loss_sum / n;
  r.accuracy = static_cast<double>(correct) / n;
  return r;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on batch-averaged gradients. The shuffle and dropout streams are derived
// from config.seed, so (seed, data, config) determine the result.
inline TrainingHistory train(Model<float>& model, const LabeledWindows& train_data,
                             const LabeledWindows& test_data, const TrainConfig& cfg,
                             const EpochCallback& on_epoch = {}) {
  require(cfg.epochs >= 1 && cfg.batch_size >= 1, "train: epochs and batch size must be positive");
  require(train_data.size() > 0, "train: empty training split");
  const std::size_t n = train_data.size(), classes = model.spec().num_classes;

  auto registry = model.parameters();
  std::vector<Tensorf*> params;
  std::vector<const Tensorf*> cparams;
  for (auto& [name, t] : registry) {
    params.push_back(t);
    cparams.push_back(t);
  }
  nn::AdamState<float> adam(cparams);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  Rng dropout_rng(derive_seed(cfg.seed, 2));

  std::vector<std::size_t> order(n);
  TrainingHistory history;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) fisher_yates(std::span<std::size_t>(order), shuffle_rng);

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Tensorf xb = gather_rows(train_data.x, idx);
      std::vector<int> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = train_data.y[idx[i]];

      const std::string where =
          "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches + 1);
      try {
        auto f = model.forward(xb, {nn::Mode::train, true, &dropout_rng});
        auto ce = nn::softmax_cross_entropy(f.logits, onehot(yb, classes));
        const double loss = ce.mean_loss();
        if (!std::isfinite(loss)) throw NumericError("non-finite loss");
        const float inv_b = 1.0f / static_cast<float>(idx.size());
        for (auto& v : ce.grad_logits.values()) v *= inv_b;
        const auto grads = model.backward(f.cache, ce.grad_logits);
        std::vector<const Tensorf*> gptr;
        for (const auto& [name, t] : registry) gptr.push_back(&grads.at(name));
        nn::adam_step(params, gptr, adam, cfg.adam);
        loss_sum += loss;
      } catch (const NumericError& e) {
        throw NumericError("training diverged at " + where + ": " + e.what());
      }
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.train_acc = evaluate(model, train_data, cfg.eval_batch).accuracy;
    if (test_data.size() > 0) {
      const auto te = evaluate(model, test_data, cfg.eval_batch);
      rec.test_loss = te.mean_loss;
      rec.test_acc = te.accuracy;
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

}  // namespace har
