#pragma once

// Single-head and multi-head CNN-LSTM classifiers.
//
// Each head is a stack of (conv k=3 -> activation -> maxpool 2/1) stages. The multi-head
// variant splits the 9 input channels into three 3-channel streams (total_acc, body_acc,
// body_gyro), runs one head per stream and concatenates the head outputs per timestep.
// The merged sequence feeds one LSTM; its final hidden state passes through dropout,
// a dense layer with activation, and the output dense layer producing logits.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/activation.hpp"
#include "har/nn/conv1d.hpp"
#include "har/nn/dense.hpp"
#include "har/nn/dropout.hpp"
#include "har/nn/init.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/lstm.hpp"
#include "har/nn/maxpool.hpp"
#include "har/ops.hpp"
#include "har/rng.hpp"

namespace har {

enum class Arch { single, multi };
enum class Activation { relu, linear };

inline const char* to_string(Arch a) { return a == Arch::single ? "single" : "multi"; }
inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

inline Arch parse_arch(const std::string& s) {
  if (s == "single") return Arch::single;
  if (s == "multi") return Arch::multi;
  throw std::invalid_argument("unknown architecture '" + s + "' (expected single|multi)");
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + s + "' (expected relu|linear)");
}

struct ModelSpec {
  Arch arch = Arch::multi;
  std::size_t window_len = 128;
  std::size_t input_channels = 9;
  std::vector<std::size_t> filters{512, 128, 64, 32};  // input side first
  std::size_t kernel = 3;
  nn::PoolConfig pool{2, 1};
  std::size_t lstm_hidden = 128;
  double dropout = 0.3;
  std::size_t dense_units = 1000;
  std::size_t num_classes = 6;
  Activation activation = Activation::relu;

  static ModelSpec standard(Arch a) {
    ModelSpec s;
    s.arch = a;
    return s;
  }

  std::size_t num_heads() const { return arch == Arch::multi ? 3 : 1; }
  std::size_t head_channels() const { return input_channels / num_heads(); }
  std::size_t lstm_input_width() const { return num_heads() * filters.back(); }

  // Sequence length at the head input and after every conv and every pool, in order.
  std::vector<std::size_t> stage_lengths() const {
    std::vector<std::size_t> out{window_len};
    std::size_t len = window_len;
    for (std::size_t i = 0; i < filters.size(); ++i) {
      if (len < kernel)
        throw std::invalid_argument("model spec: length " + std::to_string(len) +
                                    " before conv " + std::to_string(i) + " is below kernel " +
                                    std::to_string(kernel));
      len = len - kernel + 1;
      out.push_back(len);
      if (len < pool.size)
        throw std::invalid_argument("model spec: length " + std::to_string(len) +
                                    " before pool " + std::to_string(i) + " is below pool size");
      len = pool.output_length(len);
      out.push_back(len);
    }
    return out;
  }

  std::size_t lstm_steps() const { return stage_lengths().back(); }

  void validate() const {
    if (filters.empty()) throw std::invalid_argument("model spec: no conv stages");
    if (input_channels % num_heads() != 0)
      throw std::invalid_argument("model spec: input channels not divisible across heads");
    if (kernel < 1 || lstm_hidden < 1 || dense_units < 1 || num_classes < 2)
      throw std::invalid_argument("model spec: non-positive layer size");
    if (dropout < 0.0 || dropout >= 1.0)
      throw std::invalid_argument("model spec: dropout must lie in [0, 1)");
    (void)stage_lengths();
  }

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    return a.arch == b.arch && a.window_len == b.window_len &&
           a.input_channels == b.input_channels && a.filters == b.filters &&
           a.kernel == b.kernel && a.pool.size == b.pool.size && a.pool.stride == b.pool.stride &&
           a.lstm_hidden == b.lstm_hidden && a.dropout == b.dropout &&
           a.dense_units == b.dense_units && a.num_classes == b.num_classes &&
           a.activation == b.activation;
  }
};

template <typename T>
using ParamMap = std::map<std::string, Tensor<T>>;

template <typename T>
struct HeadCache {
  std::vector<Tensor<T>> conv_in;
  std::vector<Tensor<T>> conv_out;  // pre-activation
  std::vector<nn::PoolCache> pools;
};

template <typename T>
struct ModelCache {
  Shape input_shape;
  std::vector<HeadCache<T>> heads;
  nn::LstmCache<T> lstm;
  Tensor<T> dropout_mask;
  Tensor<T> fc_in;
  Tensor<T> fc_pre;
  Tensor<T> out_in;

  // Which side of every ReLU kink and which pool winner was taken. Two forwards whose
  // patterns agree lie on the same linear piece of the piecewise-linear parts.
  std::vector<std::uint32_t> pattern() const {
    std::vector<std::uint32_t> p;
    for (const auto& h : heads) {
      for (const auto& z : h.conv_out)
        for (auto v : z.values()) p.push_back(v > T{0});
      for (const auto& pc : h.pools) p.insert(p.end(), pc.argmax.begin(), pc.argmax.end());
    }
    for (auto v : fc_pre.values()) p.push_back(v > T{0});
    return p;
  }
};

struct ForwardOptions {
  nn::Mode mode = nn::Mode::eval;
  bool keep_cache = false;
  Rng* rng = nullptr;  // dropout stream, required in train mode
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;  // (B, classes)
  Tensor<T> probs;   // (B, classes)
  ModelCache<T> cache;
};

template <typename T>
class Model {
 public:
  struct Head {
    std::vector<nn::Conv1dParams<T>> convs;
  };

  Model() = default;

  // All parameters zero; see init_parameters().
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    heads_.resize(spec_.num_heads());
    for (auto& h : heads_) {
      std::size_t in = spec_.head_channels();
      for (std::size_t f : spec_.filters) {
        h.convs.emplace_back(spec_.kernel, in, f);
        in = f;
      }
    }
    lstm_ = nn::LstmParams<T>(spec_.lstm_input_width(), spec_.lstm_hidden);
    fc_ = nn::DenseParams<T>(spec_.lstm_hidden, spec_.dense_units);
    out_ = nn::DenseParams<T>(spec_.dense_units, spec_.num_classes);
  }

  const ModelSpec& spec() const { return spec_; }
  const std::vector<Head>& heads() const { return heads_; }
  std::vector<Head>& heads() { return heads_; }
  const nn::LstmParams<T>& lstm() const { return lstm_; }
  nn::LstmParams<T>& lstm() { return lstm_; }
  const nn::DenseParams<T>& fc() const { return fc_; }
  nn::DenseParams<T>& fc() { return fc_; }
  const nn::DenseParams<T>& output() const { return out_; }
  nn::DenseParams<T>& output() { return out_; }

  // Registry of every trainable tensor, sorted by name.
  std::vector<std::pair<std::string, Tensor<T>*>> parameters() {
    std::vector<std::pair<std::string, Tensor<T>*>> r;
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      for (std::size_t i = 0; i < heads_[h].convs.size(); ++i) {
        const std::string base = "head" + std::to_string(h) + ".conv" + std::to_string(i);
        r.emplace_back(base + ".bias", &heads_[h].convs[i].bias);
        r.emplace_back(base + ".weight", &heads_[h].convs[i].weight);
      }
    }
    for (std::size_t g = 0; g < 4; ++g) {
      r.emplace_back(std::string("lstm.b_") + nn::kGateSuffix[g], &lstm_.b[g]);
      r.emplace_back(std::string("lstm.u_") + nn::kGateSuffix[g], &lstm_.u[g]);
      r.emplace_back(std::string("lstm.w_") + nn::kGateSuffix[g], &lstm_.w[g]);
    }
    r.emplace_back("fc.bias", &fc_.bias);
    r.emplace_back("fc.weight", &fc_.weight);
    r.emplace_back("out.bias", &out_.bias);
    r.emplace_back("out.weight", &out_.weight);
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return r;
  }

  std::vector<std::pair<std::string, const Tensor<T>*>> parameters() const {
    auto mut = const_cast<Model*>(this)->parameters();
    std::vector<std::pair<std::string, const Tensor<T>*>> r;
    for (auto& [n, p] : mut) r.emplace_back(n, p);
    return r;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : parameters()) n += p->size();
    return n;
  }

  // batch: (B, window_len, input_channels), standardized.
  ForwardResult<T> forward(const Tensor<T>& batch, const ForwardOptions& opt = {}) const {
    require(batch.rank() == 3 && batch.dim(1) == spec_.window_len &&
                batch.dim(2) == spec_.input_channels,
            "model_forward: expected (B, " + std::to_string(spec_.window_len) + ", " +
                std::to_string(spec_.input_channels) + "), got " + shape_str(batch.shape()));
    ForwardResult<T> r;
    auto& cache = r.cache;
    const bool keep = opt.keep_cache;
    cache.input_shape = batch.shape();
    if (keep) cache.heads.resize(heads_.size());

    std::vector<Tensor<T>> streams;
    if (heads_.size() == 1) {
      streams.push_back(batch);
    } else {
      const std::vector<std::size_t> widths(heads_.size(), spec_.head_channels());
      streams = split_channels(batch, std::span<const std::size_t>(widths));
    }

    std::vector<Tensor<T>> head_out;
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      Tensor<T> x = std::move(streams[h]);
      for (std::size_t i = 0; i < heads_[h].convs.size(); ++i) {
        Tensor<T> z = nn::conv1d_forward(x, heads_[h].convs[i]);
        check_finite(z, "head" + std::to_string(h) + ".conv" + std::to_string(i));
        Tensor<T> a = activate(z);
        auto pooled = nn::maxpool_forward(a, spec_.pool);
        if (keep) {
          cache.heads[h].conv_in.push_back(std::move(x));
          cache.heads[h].conv_out.push_back(std::move(z));
          cache.heads[h].pools.push_back(std::move(pooled.cache));
        }
        x = std::move(pooled.output);
      }
      head_out.push_back(std::move(x));
    }
    Tensor<T> merged = merge_heads(std::span<const Tensor<T>>(head_out));

    auto lstm = nn::lstm_forward(merged, lstm_);
    auto drop = nn::dropout_apply(lstm.h_final, nn::DropoutConfig{spec_.dropout}, opt.mode, opt.rng);
    Tensor<T> fc_pre = nn::dense_forward(drop.output, fc_);
    check_finite(fc_pre, "fc");
    Tensor<T> fc_act = activate(fc_pre);
    r.logits = nn::dense_forward(fc_act, out_);
    check_finite(r.logits, "out");
    r.probs = nn::softmax(r.logits);
    if (keep) {
      cache.lstm = std::move(lstm.cache);
      cache.dropout_mask = std::move(drop.mask);
      cache.fc_in = std::move(drop.output);
      cache.fc_pre = std::move(fc_pre);
      cache.out_in = std::move(fc_act);
    }
    return r;
  }

  // Gradients of every registered parameter given dL/dlogits (B, classes).
  ParamMap<T> backward(const ModelCache<T>& cache, const Tensor<T>& grad_logits) const {
    require(cache.heads.size() == heads_.size() && !cache.out_in.empty(),
            "model_backward: cache missing (forward must run with keep_cache)");
    const std::size_t B = cache.input_shape.at(0);
    require(grad_logits.size() == B * spec_.num_classes,
            "model_backward: grad_logits " + shape_str(grad_logits.shape()) +
                " does not match batch of " + std::to_string(B));
    ParamMap<T> g;

    auto go = nn::dense_backward(grad_logits, cache.out_in, out_);
    g["out.weight"] = std::move(go.weight);
    g["out.bias"] = std::move(go.bias);
    auto gf = nn::dense_backward(activate_backward(go.input, cache.fc_pre), cache.fc_in, fc_);
    g["fc.weight"] = std::move(gf.weight);
    g["fc.bias"] = std::move(gf.bias);
    Tensor<T> g_hfinal = nn::dropout_backward(gf.input, cache.dropout_mask);

    auto gl = nn::lstm_backward(Tensor<T>{}, g_hfinal, cache.lstm);
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string s = nn::kGateSuffix[k];
      g["lstm.w_" + s] = std::move(gl.w[k]);
      g["lstm.u_" + s] = std::move(gl.u[k]);
      g["lstm.b_" + s] = std::move(gl.b[k]);
    }

    // Adjoint of the per-timestep concatenation: slice the same channel ranges back out.
    const std::vector<std::size_t> widths(heads_.size(), spec_.filters.back());
    auto head_grads = split_channels(gl.input, std::span<const std::size_t>(widths));
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      const auto& hc = cache.heads[h];
      Tensor<T> grad = std::move(head_grads[h]);
      for (std::size_t i = heads_[h].convs.size(); i-- > 0;) {
        Tensor<T> ga = nn::maxpool_backward(grad, hc.pools[i]);
        Tensor<T> gz = activate_backward(ga, hc.conv_out[i]);
        auto gc = nn::conv1d_backward(gz, hc.conv_in[i], heads_[h].convs[i], i > 0);
        const std::string base = "head" + std::to_string(h) + ".conv" + std::to_string(i);
        g[base + ".weight"] = std::move(gc.weight);
        g[base + ".bias"] = std::move(gc.bias);
        grad = std::move(gc.input);
      }
    }
    return g;
  }

  // argmax per row of probs; ties resolve to the lowest class index.
  static std::vector<int> argmax_rows(const Tensor<T>& probs) {
    const std::size_t k = probs.shape().back(), rows = probs.size() / k;
    std::vector<int> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* p = probs.data() + r * k;
      out[r] = static_cast<int>(std::max_element(p, p + k) - p);
    }
    return out;
  }

  std::vector<int> predict(const Tensor<T>& batch) const {
    return argmax_rows(forward(batch, {nn::Mode::eval, false, nullptr}).probs);
  }

  static Tensor<T> merge_heads(std::span<const Tensor<T>> heads) {
    for (const auto& h : heads)
      require(h.rank() >= 2 && h.dim(h.rank() - 2) == heads[0].dim(heads[0].rank() - 2),
              "merge_heads: head temporal lengths differ");
    return concat_channels(heads);
  }

 private:
  Tensor<T> activate(const Tensor<T>& z) const {
    return spec_.activation == Activation::relu ? nn::relu_forward(z) : z;
  }
  Tensor<T> activate_backward(const Tensor<T>& g, const Tensor<T>& z) const {
    return spec_.activation == Activation::relu ? nn::relu_backward(g, z) : g;
  }
  static void check_finite(const Tensor<T>& t, const std::string& layer) {
    if (!t.all_finite()) throw NumericError("non-finite activation in layer " + layer);
  }

  ModelSpec spec_;
  std::vector<Head> heads_;
  nn::LstmParams<T> lstm_;
  nn::DenseParams<T> fc_;
  nn::DenseParams<T> out_;
};

// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1. Each tensor draws from its
// own stream derived from (seed, registry position), so results depend only on the seed.
template <typename T>
void init_parameters(Model<T>& m, std::uint64_t seed) {
  // Conv kernels (k, in, out) use the receptive-field convention fan = k * channels.
  auto fans = [](const Tensor<T>& t) -> std::pair<std::size_t, std::size_t> {
    if (t.rank() == 3) return {t.dim(0) * t.dim(1), t.dim(0) * t.dim(2)};
    return {t.dim(0), t.dim(1)};
  };
  std::uint64_t stream = 0;
  for (auto& [name, t] : m.parameters()) {
    Rng rng(derive_seed(seed, stream++));
    if (t->rank() == 1) {
      t->fill(name == "lstm.b_f" ? T{1} : T{0});
    } else {
      const auto [fan_in, fan_out] = fans(*t);
      nn::glorot_uniform(*t, fan_in, fan_out, rng);
    }
  }
}

template <typename T = float>
Model<T> build_model(const ModelSpec& spec, std::uint64_t seed) {
  Model<T> m(spec);
  init_parameters(m, seed);
  return m;
}

template <typename T = float>
Model<T> build_single_head(std::uint64_t seed, ModelSpec spec = ModelSpec::standard(Arch::single)) {
  spec.arch = Arch::single;
  return build_model<T>(spec, seed);
}

template <typename T = float>
Model<T> build_multi_head(std::uint64_t seed, ModelSpec spec = ModelSpec::standard(Arch::multi)) {
  spec.arch = Arch::multi;
  return build_model<T>(spec, seed);
}

}  // namespace har
