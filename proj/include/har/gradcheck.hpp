#pragma once

// Central-difference verification of every hand-written backward pass, in double precision.
//
// Layer checks differentiate the scalar sum(output * R) for a fixed random R, so the
// analytic side is simply backward(R). The whole-model check differentiates summed
// cross-entropy through a shrunken multi-head network with dropout active (the dropout
// stream is reseeded for every evaluation so the mask is fixed). Coordinates whose
// perturbation moves a ReLU or max-pool across a kink are skipped and counted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "har/model.hpp"
#include "har/rng.hpp"

namespace har::gradcheck {

inline constexpr double kStep = 1e-5;
// Gradient magnitudes below this are compared on an absolute scale.
inline constexpr double kRelFloor = 1e-7;

inline constexpr double kTolConv = 1e-6;
inline constexpr double kTolPool = 1e-6;
inline constexpr double kTolDense = 1e-6;
inline constexpr double kTolSoftmax = 1e-6;
inline constexpr double kTolLstm = 1e-4;
inline constexpr double kTolModel = 1e-3;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
}

struct TensorResult {
  std::string name;
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

struct Report {
  std::string kind;
  double tolerance = 0;
  std::vector<TensorResult> tensors;

  double max_rel_error() const {
    double m = 0;
    for (const auto& t : tensors) m = std::max(m, t.max_rel_error);
    return m;
  }
  std::size_t skipped() const {
    std::size_t s = 0;
    for (const auto& t : tensors) s += t.skipped;
    return s;
  }
  bool passed() const {
    if (tensors.empty()) return false;
    for (const auto& t : tensors)
      if (t.checked == 0 || !(t.max_rel_error < tolerance)) return false;
    return true;
  }
};

using DenseBackwardFn = std::function<nn::DenseGrads<double>(
    const Tensord& grad_out, const Tensord& x, const nn::DenseParams<double>& p)>;

inline DenseBackwardFn default_dense_backward() {
  return [](const Tensord& g, const Tensord& x, const nn::DenseParams<double>& p) {
    return nn::dense_backward(g, x, p);
  };
}

namespace detail {

inline void fill_uniform(Tensord& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& v : t.values()) v = uniform(rng, lo, hi);
}

inline Tensord random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensord t(std::move(s));
  fill_uniform(t, rng, lo, hi);
  return t;
}

inline double dot(const Tensord& a, const Tensord& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Compares `analytic` against central differences of `loss` w.r.t. `target`. `same_piece`,
// if given, is asked after each perturbation whether the evaluation stayed on the same
// piecewise-linear segment; coordinates where it did not are skipped.
inline TensorResult compare(const std::string& name, Tensord& target, const Tensord& analytic,
                            const std::function<double()>& loss,
                            const std::function<bool()>& same_piece = {}) {
  TensorResult r{name};
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double orig = target[i];
    target[i] = orig + kStep;
    const double up = loss();
    const bool up_ok = !same_piece || same_piece();
    target[i] = orig - kStep;
    const double down = loss();
    const bool down_ok = !same_piece || same_piece();
    target[i] = orig;
    if (!up_ok || !down_ok) {
      ++r.skipped;
      continue;
    }
    const double numeric = (up - down) / (2 * kStep);
    r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[i], numeric));
    ++r.checked;
  }
  return r;
}

}  // namespace detail

inline Report check_conv(std::uint64_t seed) {
  Rng rng(seed);
  nn::Conv1dParams<double> p(3, 2, 2);
  detail::fill_uniform(p.weight, rng);
  detail::fill_uniform(p.bias, rng);
  Tensord x = detail::random_tensor({2, 6, 2}, rng);
  const Tensord proj = detail::random_tensor({2, 4, 2}, rng);
  const auto g = nn::conv1d_backward(proj, x, p);
  auto loss = [&] { return detail::dot(nn::conv1d_forward(x, p), proj); };
  Report rep{"conv", kTolConv, {}};
  rep.tensors.push_back(detail::compare("weight", p.weight, g.weight, loss));
  rep.tensors.push_back(detail::compare("bias", p.bias, g.bias, loss));
  rep.tensors.push_back(detail::compare("input", x, g.input, loss));
  return rep;
}

inline Report check_pool(std::uint64_t seed) {
  Rng rng(seed);
  // Distinct values on a 0.1 grid keep every comparison far from a tie.
  Tensord x({2, 7, 3});
  std::vector<std::size_t> perm(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  fisher_yates(std::span<std::size_t>(perm), rng);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>(perm[i]) - 2.0;
  const auto fwd = nn::maxpool_forward(x);
  const Tensord proj = detail::random_tensor(fwd.output.shape(), rng);
  const Tensord gx = nn::maxpool_backward(proj, fwd.cache);
  auto loss = [&] { return detail::dot(nn::maxpool_forward(x).output, proj); };
  Report rep{"pool", kTolPool, {}};
  rep.tensors.push_back(detail::compare("input", x, gx, loss));
  return rep;
}

inline Report check_lstm(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t B = 2, S = 4, D = 3, H = 3;
  nn::LstmParams<double> p(D, H);
  for (std::size_t g = 0; g < 4; ++g) {
    detail::fill_uniform(p.w[g], rng, -0.8, 0.8);
    detail::fill_uniform(p.u[g], rng, -0.8, 0.8);
    detail::fill_uniform(p.b[g], rng, -0.5, 0.5);
  }
  Tensord x = detail::random_tensor({B, S, D}, rng);
  const Tensord proj_seq = detail::random_tensor({B, S, H}, rng);
  const Tensord proj_final = detail::random_tensor({B, H}, rng);
  const auto fwd = nn::lstm_forward(x, p);
  const auto g = nn::lstm_backward(proj_seq, proj_final, fwd.cache);
  auto loss = [&] {
    const auto r = nn::lstm_forward(x, p);
    return detail::dot(r.h_seq, proj_seq) + detail::dot(r.h_final, proj_final);
  };
  Report rep{"lstm", kTolLstm, {}};
  for (std::size_t k = 0; k < 4; ++k) {
    const std::string s = nn::kGateSuffix[k];
    rep.tensors.push_back(detail::compare("w_" + s, p.w[k], g.w[k], loss));
    rep.tensors.push_back(detail::compare("u_" + s, p.u[k], g.u[k], loss));
    rep.tensors.push_back(detail::compare("b_" + s, p.b[k], g.b[k], loss));
  }
  rep.tensors.push_back(detail::compare("input", x, g.input, loss));
  return rep;
}

inline Report check_dense(std::uint64_t seed, const DenseBackwardFn& backward = default_dense_backward()) {
  Rng rng(seed);
  nn::DenseParams<double> p(4, 3);
  detail::fill_uniform(p.weight, rng);
  detail::fill_uniform(p.bias, rng);
  Tensord x = detail::random_tensor({2, 4}, rng);
  const Tensord proj = detail::random_tensor({2, 3}, rng);
  const auto g = backward(proj, x, p);
  auto loss = [&] { return detail::dot(nn::dense_forward(x, p), proj); };
  Report rep{"dense", kTolDense, {}};
  rep.tensors.push_back(detail::compare("weight", p.weight, g.weight, loss));
  rep.tensors.push_back(detail::compare("bias", p.bias, g.bias, loss));
  rep.tensors.push_back(detail::compare("input", x, g.input, loss));
  return rep;
}

inline Report check_softmax_ce(std::uint64_t seed) {
  Rng rng(seed);
  Tensord logits = detail::random_tensor({3, 6}, rng, -2.0, 2.0);
  Tensord target({3, 6});
  for (std::size_t r = 0; r < 3; ++r) target(r, uniform_index(rng, 6)) = 1.0;
  const auto ce = nn::softmax_cross_entropy(logits, target);
  auto loss = [&] {
    const auto l = nn::softmax_cross_entropy(logits, target).loss;
    double s = 0;
    for (double v : l) s += v;
    return s;
  };
  Report rep{"softmax-ce", kTolSoftmax, {}};
  rep.tensors.push_back(detail::compare("logits", logits, ce.grad_logits, loss));
  return rep;
}

// The reduced multi-head network used for the whole-model check.
inline ModelSpec shrunken_spec() {
  ModelSpec s;
  s.arch = Arch::multi;
  s.window_len = 8;
  s.filters = {4, 3};
  s.lstm_hidden = 3;
  s.dense_units = 5;
  return s;
}

inline Report check_model(std::uint64_t seed) {
  auto model = build_model<double>(shrunken_spec(), seed);
  Rng rng(derive_seed(seed, 7));
  // Nudge biases off zero so no ReLU sits exactly at its kink.
  for (auto& [name, t] : model.parameters())
    if (t->rank() == 1 && name.rfind("lstm.", 0) != 0) detail::fill_uniform(*t, rng, -0.1, 0.1);
  const std::size_t B = 2;
  const Tensord x = detail::random_tensor({B, 8, 9}, rng);
  std::vector<int> classes(B);
  for (auto& c : classes) c = static_cast<int>(uniform_index(rng, 6));
  Tensord target({B, 6});
  for (std::size_t i = 0; i < B; ++i) target(i, static_cast<std::size_t>(classes[i])) = 1.0;
  const std::uint64_t dropout_seed = derive_seed(seed, 8);

  auto run = [&] {
    Rng drop(dropout_seed);
    return model.forward(x, {nn::Mode::train, true, &drop});
  };
  const auto base = run();
  const auto base_pattern = base.cache.pattern();
  const auto ce = nn::softmax_cross_entropy(base.logits, target);
  const auto grads = model.backward(base.cache, ce.grad_logits);

  std::vector<std::uint32_t> last_pattern;
  auto loss = [&] {
    const auto f = run();
    last_pattern = f.cache.pattern();
    double s = 0;
    for (double v : nn::softmax_cross_entropy(f.logits, target).loss) s += v;
    return s;
  };
  auto same_piece = [&] { return last_pattern == base_pattern; };

  Report rep{"whole-model", kTolModel, {}};
  for (auto& [name, t] : model.parameters())
    rep.tensors.push_back(detail::compare(name, *t, grads.at(name), loss, same_piece));
  return rep;
}

inline std::vector<Report> run_all(std::uint64_t seed,
                                   const DenseBackwardFn& dense_backward = default_dense_backward()) {
  return {check_conv(seed),       check_pool(seed),         check_lstm(seed),
          check_dense(seed, dense_backward), check_softmax_ce(seed), check_model(seed)};
}

}  // namespace har::gradcheck
