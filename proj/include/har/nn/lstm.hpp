#pragma once

// Single-layer LSTM without peepholes:
//   i, f, o = sigmoid(x W_* + h U_* + b_*),  g = tanh(x W_g + h U_g + b_g)
//   c <- f * c + i * g,  h <- o * tanh(c)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/seq.hpp"

namespace har::nn {

enum Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCell = 3 };
inline constexpr std::array<const char*, 4> kGateSuffix = {"i", "f", "o", "g"};

template <typename T>
struct LstmParams {
  std::array<Tensor<T>, 4> w;  // (in_dim, hidden) per gate
  std::array<Tensor<T>, 4> u;  // (hidden, hidden)
  std::array<Tensor<T>, 4> b;  // (hidden)

  LstmParams() = default;
  LstmParams(std::size_t in_dim, std::size_t hidden) {
    for (std::size_t g = 0; g < 4; ++g) {
      w[g] = Tensor<T>({in_dim, hidden});
      u[g] = Tensor<T>({hidden, hidden});
      b[g] = Tensor<T>({hidden});
    }
  }

  std::size_t in_dim() const { return w[0].dim(0); }
  std::size_t hidden() const { return w[0].dim(1); }
};

template <typename T>
struct LstmGrads {
  Tensor<T> input;  // (B, T, D) or (T, D); empty when not requested
  std::array<Tensor<T>, 4> w, u, b;
};

// Everything backward needs; rows are time-major (t * batch + n).
template <typename T>
struct LstmCache {
  Shape input_shape;
  std::size_t batch = 0, steps = 0, in_dim = 0, hidden = 0;
  RowMatrix<T> x;        // (steps*batch, in_dim)
  RowMatrix<T> gates;    // (steps*batch, 4*hidden) activated i, f, o, g
  RowMatrix<T> c;        // ((steps+1)*batch, hidden), block 0 is c0
  RowMatrix<T> h;        // ((steps+1)*batch, hidden), block 0 is h0
  RowMatrix<T> w_packed; // (in_dim, 4*hidden)
  RowMatrix<T> u_packed; // (hidden, 4*hidden)
};

template <typename T>
struct LstmResult {
  Tensor<T> h_seq;    // same leading layout as input, last axis = hidden
  Tensor<T> h_final;  // (B, hidden) or (hidden)
  Tensor<T> c_final;
  LstmCache<T> cache;
};

namespace detail {

template <typename T>
RowMatrix<T> pack_gates(const std::array<Tensor<T>, 4>& parts) {
  const std::size_t rows = parts[0].dim(0), h = parts[0].dim(1);
  RowMatrix<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(4 * h));
  for (std::size_t g = 0; g < 4; ++g)
    m.middleCols(static_cast<Eigen::Index>(g * h), static_cast<Eigen::Index>(h)) = as_matrix(parts[g]);
  return m;
}

template <typename T>
T sigmoid(T z) {
  return T{1} / (T{1} + std::exp(-z));
}

}  // namespace detail

// h0 / c0 may be empty (zero state) or shaped (B, hidden) / (hidden).
template <typename T>
LstmResult<T> lstm_forward(const Tensor<T>& x, const LstmParams<T>& p, const Tensor<T>& h0 = {},
                           const Tensor<T>& c0 = {}) {
  const auto d = detail::seq_dims(x, "lstm_forward");
  const std::size_t B = d.batch, S = d.length, D = d.channels, H = p.hidden();
  require(S >= 1, "lstm_forward: empty sequence");
  require(D == p.in_dim(), "lstm_forward: input width " + std::to_string(D) +
                               " does not match layer input " + std::to_string(p.in_dim()));
  require(h0.empty() || h0.size() == B * H, "lstm_forward: h0 has wrong size");
  require(c0.empty() || c0.size() == B * H, "lstm_forward: c0 has wrong size");
  const auto Bi = static_cast<Eigen::Index>(B), Hi = static_cast<Eigen::Index>(H);

  LstmResult<T> r;
  auto& k = r.cache;
  k.input_shape = x.shape();
  k.batch = B, k.steps = S, k.in_dim = D, k.hidden = H;
  k.w_packed = detail::pack_gates(p.w);
  k.u_packed = detail::pack_gates(p.u);

  k.x.resize(static_cast<Eigen::Index>(S * B), static_cast<Eigen::Index>(D));
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t t = 0; t < S; ++t)
      k.x.row(static_cast<Eigen::Index>(t * B + n)) =
          ConstRowVecMap<T>(x.data() + (n * S + t) * D, static_cast<Eigen::Index>(D));

  Eigen::Matrix<T, 1, Eigen::Dynamic> bias(4 * Hi);
  for (std::size_t g = 0; g < 4; ++g)
    bias.segment(static_cast<Eigen::Index>(g) * Hi, Hi) = ConstRowVecMap<T>(p.b[g].data(), Hi);

  k.gates.noalias() = k.x * k.w_packed;
  k.gates.rowwise() += bias;

  k.c.setZero(static_cast<Eigen::Index>((S + 1) * B), Hi);
  k.h.setZero(static_cast<Eigen::Index>((S + 1) * B), Hi);
  if (!h0.empty()) k.h.topRows(Bi) = as_matrix(h0.data(), B, H);
  if (!c0.empty()) k.c.topRows(Bi) = as_matrix(c0.data(), B, H);

  for (std::size_t t = 0; t < S; ++t) {
    const auto row = static_cast<Eigen::Index>(t * B);
    auto z = k.gates.middleRows(row, Bi);
    z.noalias() += k.h.middleRows(row, Bi) * k.u_packed;
    for (Eigen::Index n = 0; n < Bi; ++n) {
      for (Eigen::Index j = 0; j < Hi; ++j) {
        T& i_g = z(n, j);
        T& f_g = z(n, Hi + j);
        T& o_g = z(n, 2 * Hi + j);
        T& g_g = z(n, 3 * Hi + j);
        i_g = detail::sigmoid(i_g);
        f_g = detail::sigmoid(f_g);
        o_g = detail::sigmoid(o_g);
        g_g = std::tanh(g_g);
        const T c = f_g * k.c(row + n, j) + i_g * g_g;
        k.c(row + Bi + n, j) = c;
        k.h(row + Bi + n, j) = o_g * std::tanh(c);
      }
    }
    if (!k.h.middleRows(row + Bi, Bi).allFinite())
      throw NumericError("lstm_forward: non-finite hidden state at timestep " + std::to_string(t));
  }

  r.h_seq = Tensor<T>(detail::seq_shape(x, {B, S, H}));
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t t = 0; t < S; ++t)
      RowVecMap<T>(r.h_seq.data() + (n * S + t) * H, Hi) =
          k.h.row(static_cast<Eigen::Index>((t + 1) * B + n));
  const Shape state_shape = x.rank() == 2 ? Shape{H} : Shape{B, H};
  r.h_final = Tensor<T>(state_shape);
  r.c_final = Tensor<T>(state_shape);
  as_matrix(r.h_final.data(), B, H) = k.h.bottomRows(Bi);
  as_matrix(r.c_final.data(), B, H) = k.c.bottomRows(Bi);
  return r;
}

// Backpropagation through time. Either upstream gradient may be empty (treated as zero).
template <typename T>
LstmGrads<T> lstm_backward(const Tensor<T>& grad_h_seq, const Tensor<T>& grad_h_final,
                           const LstmCache<T>& k, bool want_input_grad = true) {
  const std::size_t B = k.batch, S = k.steps, D = k.in_dim, H = k.hidden;
  const auto Bi = static_cast<Eigen::Index>(B), Hi = static_cast<Eigen::Index>(H);
  require(grad_h_seq.empty() || grad_h_seq.size() == B * S * H,
          "lstm_backward: grad_h_seq does not match cached forward");
  require(grad_h_final.empty() || grad_h_final.size() == B * H,
          "lstm_backward: grad_h_final does not match cached forward");
  require(k.gates.rows() == static_cast<Eigen::Index>(S * B), "lstm_backward: corrupt cache");

  RowMatrix<T> dz(static_cast<Eigen::Index>(S * B), 4 * Hi);
  RowMatrix<T> dh_next = RowMatrix<T>::Zero(Bi, Hi);
  RowMatrix<T> dc_next = RowMatrix<T>::Zero(Bi, Hi);
  RowMatrix<T> du = RowMatrix<T>::Zero(Hi, 4 * Hi);
  if (!grad_h_final.empty()) dh_next = as_matrix(grad_h_final.data(), B, H);

  for (std::size_t tt = S; tt-- > 0;) {
    const auto row = static_cast<Eigen::Index>(tt * B);
    if (!grad_h_seq.empty())
      for (std::size_t n = 0; n < B; ++n)
        dh_next.row(static_cast<Eigen::Index>(n)) +=
            ConstRowVecMap<T>(grad_h_seq.data() + (n * S + tt) * H, Hi);
    auto a = k.gates.middleRows(row, Bi);
    auto dzt = dz.middleRows(row, Bi);
    for (Eigen::Index n = 0; n < Bi; ++n) {
      for (Eigen::Index j = 0; j < Hi; ++j) {
        const T i_g = a(n, j), f_g = a(n, Hi + j), o_g = a(n, 2 * Hi + j), g_g = a(n, 3 * Hi + j);
        const T c_prev = k.c(row + n, j);
        const T tc = std::tanh(k.c(row + Bi + n, j));
        const T dh = dh_next(n, j);
        const T dc = dc_next(n, j) + dh * o_g * (T{1} - tc * tc);
        dzt(n, j) = dc * g_g * i_g * (T{1} - i_g);
        dzt(n, Hi + j) = dc * c_prev * f_g * (T{1} - f_g);
        dzt(n, 2 * Hi + j) = dh * tc * o_g * (T{1} - o_g);
        dzt(n, 3 * Hi + j) = dc * i_g * (T{1} - g_g * g_g);
        dc_next(n, j) = dc * f_g;
      }
    }
    du.noalias() += k.h.middleRows(row, Bi).transpose() * dzt;
    dh_next.noalias() = dzt * k.u_packed.transpose();
  }

  const RowMatrix<T> dw = k.x.transpose() * dz;
  std::vector<T> db(4 * H, T{0});
  accumulate_column_sums(dz, db.data());
  LstmGrads<T> g;
  for (std::size_t gate = 0; gate < 4; ++gate) {
    const auto col = static_cast<Eigen::Index>(gate) * Hi;
    g.w[gate] = Tensor<T>({D, H});
    as_matrix(g.w[gate]) = dw.middleCols(col, Hi);
    g.u[gate] = Tensor<T>({H, H});
    as_matrix(g.u[gate]) = du.middleCols(col, Hi);
    g.b[gate] = Tensor<T>({H});
    std::copy_n(db.begin() + col, H, g.b[gate].data());
  }
  if (want_input_grad) {
    const RowMatrix<T> dx = dz * k.w_packed.transpose();
    g.input = Tensor<T>(k.input_shape);
    for (std::size_t n = 0; n < B; ++n)
      for (std::size_t t = 0; t < S; ++t)
        RowVecMap<T>(g.input.data() + (n * S + t) * D, static_cast<Eigen::Index>(D)) =
            dx.row(static_cast<Eigen::Index>(t * B + n));
  }
  return g;
}

}  // namespace har::nn
