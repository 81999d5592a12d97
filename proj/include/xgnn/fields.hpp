#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xgnn/dual.hpp"
#include "xgnn/jet.hpp"
#include "xgnn/parallel.hpp"
#include "xgnn/quadrature.hpp"

namespace xgnn {

enum Channel { kV = 0, kX = 1, kY = 2, kXX = 3, kXY = 4, kYY = 5 };
constexpr int kChannels = 6;
using ChannelMask = std::array<bool, kChannels>;
constexpr ChannelMask kAllChannels{true, true, true, true, true, true};

// Field traces at nodes, one vector per channel (empty when not requested).
using Bundle = std::array<Vec, kChannels>;
// Per-unit traces: nodes x units per channel.
using UnitBundle = std::array<Mat, kChannels>;
// Traces at a single point.
using PointBundle = std::array<double, kChannels>;

struct Layer {
  Mat W;  // fan_in x width
  Vec b;  // width
};

struct NeuralField {
  std::vector<Layer> layers;
  Vec c;  // output coefficients, length = last width
  double scale = 1.0;

  int depth() const { return static_cast<int>(layers.size()); }
  int width() const { return layers.empty() ? 0 : static_cast<int>(layers.back().b.size()); }
  int hidden_param_count() const {
    int n = 0;
    for (const auto& l : layers) n += static_cast<int>(l.W.size() + l.b.size());
    return n;
  }
};

// Uniform in [-1, 1] from the top 53 bits; independent of the standard library's distributions.
inline double uniform_pm1(std::mt19937_64& rng) {
  return -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline NeuralField init_network(int width, int depth, double scale, std::mt19937_64& rng) {
  NeuralField f;
  f.scale = scale;
  int fan_in = 2;
  for (int l = 0; l < depth; ++l) {
    Layer L;
    L.W.resize(fan_in, width);
    L.b.resize(width);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < width; ++j) L.W(i, j) = uniform_pm1(rng);
    for (int j = 0; j < width; ++j) L.b[j] = uniform_pm1(rng);
    f.layers.push_back(std::move(L));
    fan_in = width;
  }
  f.c = Vec::Zero(width);
  return f;
}

inline NeuralField init_network(int width, int depth, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_network(width, depth, scale, rng);
}

// Flattened hidden parameters: per layer W (row-major) then b.
inline Vec get_params(const NeuralField& f) {
  Vec p(f.hidden_param_count());
  int k = 0;
  for (const auto& L : f.layers) {
    for (int i = 0; i < L.W.rows(); ++i)
      for (int j = 0; j < L.W.cols(); ++j) p[k++] = L.W(i, j);
    for (int j = 0; j < L.b.size(); ++j) p[k++] = L.b[j];
  }
  return p;
}

inline void set_params(NeuralField& f, const Vec& p) {
  int k = 0;
  for (auto& L : f.layers) {
    for (int i = 0; i < L.W.rows(); ++i)
      for (int j = 0; j < L.W.cols(); ++j) L.W(i, j) = p[k++];
    for (int j = 0; j < L.b.size(); ++j) L.b[j] = p[k++];
  }
}

namespace detail {

// Last-layer unit jets at one point; S is double or a Dual carrying a parameter direction.
template <class S>
std::vector<Jet<S, 2>> unit_jets(const NeuralField& f, double x, double y, int seed_param = -1) {
  using J = Jet<S, 2>;
  std::vector<J> a{J::promote(Jet<double, 2>::affine(x, 1.0, 0.0)), J::promote(Jet<double, 2>::affine(y, 0.0, 1.0))};
  int k = 0;
  const S s(f.scale);
  for (const auto& L : f.layers) {
    std::vector<J> z(L.b.size());
    std::vector<S> Wd(L.W.size());
    for (int i = 0; i < L.W.rows(); ++i)
      for (int j = 0; j < L.W.cols(); ++j, ++k) {
        S w(L.W(i, j));
        if constexpr (!std::is_same_v<S, double>) if (k == seed_param) w.d[0] = 1.0;
        Wd[i * L.W.cols() + j] = w;
      }
    for (int j = 0; j < L.b.size(); ++j, ++k) {
      S bj(L.b[j]);
      if constexpr (!std::is_same_v<S, double>) if (k == seed_param) bj.d[0] = 1.0;
      J zj(bj);
      for (int i = 0; i < L.W.rows(); ++i) zj += a[i] * Wd[i * L.W.cols() + j];
      z[j] = tanh(zj * s);
    }
    a = std::move(z);
  }
  return a;
}

template <class S>
void store(const Jet<S, 2>& j, std::array<S, kChannels>& out) {
  out[kV] = j.deriv(0, 0);
  out[kX] = j.deriv(1, 0);
  out[kY] = j.deriv(0, 1);
  out[kXX] = j.deriv(2, 0);
  out[kXY] = j.deriv(1, 1);
  out[kYY] = j.deriv(0, 2);
}

}  // namespace detail

// Per-unit traces of the last hidden layer at (x, y).
inline UnitBundle eval_units(const NeuralField& f, const Vec& x, const Vec& y, const ChannelMask& mask = kAllChannels) {
  const int N = static_cast<int>(x.size()), n = f.width();
  UnitBundle U;
  for (int ch = 0; ch < kChannels; ++ch)
    if (mask[ch]) U[ch].resize(N, n);
  if (f.depth() == 1) {
    const auto& L = f.layers[0];
    const double s = f.scale;
    parallel_for(n, [&](int k0, int k1) {
      for (int k = k0; k < k1; ++k) {
        const double w1 = L.W(0, k), w2 = L.W(1, k);
        Eigen::ArrayXd t = (s * (x.array() * w1 + y.array() * w2 + L.b[k])).tanh();
        Eigen::ArrayXd T1 = 1.0 - t.square();
        if (mask[kV]) U[kV].col(k) = t.matrix();
        if (mask[kX]) U[kX].col(k) = (s * w1 * T1).matrix();
        if (mask[kY]) U[kY].col(k) = (s * w2 * T1).matrix();
        if (mask[kXX] || mask[kXY] || mask[kYY]) {
          Eigen::ArrayXd T2 = -2.0 * t * T1 * (s * s);
          if (mask[kXX]) U[kXX].col(k) = (w1 * w1 * T2).matrix();
          if (mask[kXY]) U[kXY].col(k) = (w1 * w2 * T2).matrix();
          if (mask[kYY]) U[kYY].col(k) = (w2 * w2 * T2).matrix();
        }
      }
    }, 4);
    return U;
  }
  parallel_for(N, [&](int i0, int i1) {
    std::array<double, kChannels> b;
    for (int i = i0; i < i1; ++i) {
      auto js = detail::unit_jets<double>(f, x[i], y[i]);
      for (int k = 0; k < n; ++k) {
        detail::store(js[k], b);
        for (int ch = 0; ch < kChannels; ++ch)
          if (mask[ch]) U[ch](i, k) = b[ch];
      }
    }
  });
  return U;
}

// Assembled field v = Σ_k c_k unit_k.
inline Bundle eval_bundle(const NeuralField& f, const Vec& x, const Vec& y, const ChannelMask& mask = kAllChannels) {
  UnitBundle U = eval_units(f, x, y, mask);
  Bundle B;
  for (int ch = 0; ch < kChannels; ++ch)
    if (mask[ch]) B[ch] = U[ch] * f.c;
  return B;
}

// Node-level adjoint weights per channel (empty = zero).
using Adjoint = std::array<Vec, kChannels>;

// Σ_nodes Σ_ch adj_ch ∂(Σ_k coef_k unit_k)_ch/∂θ over the hidden parameters θ
// (layout of get_params).
inline Vec hidden_gradient(const NeuralField& f, const Vec& x, const Vec& y, const Adjoint& adj, const Vec& coef) {
  const int n = f.width();
  Vec g = Vec::Zero(f.hidden_param_count());
  const int N = static_cast<int>(x.size());
  auto has = [&](int ch) { return adj[ch].size() == N; };
  if (f.depth() == 1) {
    const auto& L = f.layers[0];
    const double s = f.scale;
    const bool second = has(kXX) || has(kXY) || has(kYY);
    parallel_for(n, [&](int k0, int k1) {
      for (int k = k0; k < k1; ++k) {
        const double w1 = L.W(0, k), w2 = L.W(1, k);
        Eigen::ArrayXd t = (s * (x.array() * w1 + y.array() * w2 + L.b[k])).tanh();
        Eigen::ArrayXd T1 = 1.0 - t.square();
        Eigen::ArrayXd T2 = -2.0 * t * T1;
        Eigen::ArrayXd Pz = Eigen::ArrayXd::Zero(N);
        double gw1 = 0.0, gw2 = 0.0;
        if (has(kV)) Pz += adj[kV].array() * T1;
        if (has(kX)) {
          Pz += s * w1 * adj[kX].array() * T2;
          gw1 += s * (adj[kX].array() * T1).sum();
        }
        if (has(kY)) {
          Pz += s * w2 * adj[kY].array() * T2;
          gw2 += s * (adj[kY].array() * T1).sum();
        }
        if (second) {
          Eigen::ArrayXd T3 = -2.0 * T1 * (1.0 - 3.0 * t.square());
          Eigen::ArrayXd q = Eigen::ArrayXd::Zero(N), q1 = Eigen::ArrayXd::Zero(N), q2 = Eigen::ArrayXd::Zero(N);
          if (has(kXX)) { q += w1 * w1 * adj[kXX].array(); q1 += 2.0 * w1 * adj[kXX].array(); }
          if (has(kXY)) { q += w1 * w2 * adj[kXY].array(); q1 += w2 * adj[kXY].array(); q2 += w1 * adj[kXY].array(); }
          if (has(kYY)) { q += w2 * w2 * adj[kYY].array(); q2 += 2.0 * w2 * adj[kYY].array(); }
          Pz += s * s * T3 * q;
          gw1 += s * s * (T2 * q1).sum();
          gw2 += s * s * (T2 * q2).sum();
        }
        gw1 += s * (Pz * x.array()).sum();
        gw2 += s * (Pz * y.array()).sum();
        const double gb = s * Pz.sum();
        // layout: W row-major (row 0 = x weights, row 1 = y weights), then b
        g[k] = coef[k] * gw1;
        g[n + k] = coef[k] * gw2;
        g[2 * n + k] = coef[k] * gb;
      }
    }, 4);
    return g;
  }
  const int P = f.hidden_param_count();
  parallel_for(P, [&](int p0, int p1) {
    std::array<Dual<1>, kChannels> b;
    for (int p = p0; p < p1; ++p) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        auto js = detail::unit_jets<Dual<1>>(f, x[i], y[i], p);
        for (int k = 0; k < n; ++k) {
          detail::store(js[k], b);
          for (int ch = 0; ch < kChannels; ++ch)
            if (has(ch)) acc += adj[ch][i] * coef[k] * b[ch].d[0];
        }
      }
      g[p] = acc;
    }
  }, 1);
  return g;
}

// ∂(assembled bundle)/∂θ_p for every hidden parameter p: result[p][ch] is a node vector.
inline std::vector<Bundle> param_jacobian(const NeuralField& f, const Vec& x, const Vec& y, int deriv_order = 2) {
  const int P = f.hidden_param_count(), N = static_cast<int>(x.size()), n = f.width();
  ChannelMask mask{true, deriv_order >= 1, deriv_order >= 1, deriv_order >= 2, deriv_order >= 2, deriv_order >= 2};
  std::vector<Bundle> out(P);
  for (auto& b : out)
    for (int ch = 0; ch < kChannels; ++ch)
      if (mask[ch]) b[ch] = Vec::Zero(N);
  if (f.depth() == 1) {
    const auto& L = f.layers[0];
    const double s = f.scale;
    for (int k = 0; k < n; ++k) {
      const double w1 = L.W(0, k), w2 = L.W(1, k), ck = f.c[k];
      Eigen::ArrayXd t = (s * (x.array() * w1 + y.array() * w2 + L.b[k])).tanh();
      Eigen::ArrayXd T1 = 1.0 - t.square(), T2 = -2.0 * t * T1, T3 = -2.0 * T1 * (1.0 - 3.0 * t.square());
      // d/dz of each channel (z = x w1 + y w2 + b), and explicit w-derivatives
      std::array<Eigen::ArrayXd, kChannels> dz{s * T1, s * s * w1 * T2, s * s * w2 * T2, s * s * s * w1 * w1 * T3,
                                               s * s * s * w1 * w2 * T3, s * s * s * w2 * w2 * T3};
      std::array<Eigen::ArrayXd, kChannels> e1{0 * T1, s * T1, 0 * T1, 2 * s * s * w1 * T2, s * s * w2 * T2, 0 * T1};
      std::array<Eigen::ArrayXd, kChannels> e2{0 * T1, 0 * T1, s * T1, 0 * T1, s * s * w1 * T2, 2 * s * s * w2 * T2};
      for (int ch = 0; ch < kChannels; ++ch) {
        if (!mask[ch]) continue;
        out[k][ch] = (ck * (dz[ch] * x.array() + e1[ch])).matrix();
        out[n + k][ch] = (ck * (dz[ch] * y.array() + e2[ch])).matrix();
        out[2 * n + k][ch] = (ck * dz[ch]).matrix();
      }
    }
    return out;
  }
  std::array<Dual<1>, kChannels> b;
  for (int p = 0; p < P; ++p)
    for (int i = 0; i < N; ++i) {
      auto js = detail::unit_jets<Dual<1>>(f, x[i], y[i], p);
      for (int k = 0; k < n; ++k) {
        detail::store(js[k], b);
        for (int ch = 0; ch < kChannels; ++ch)
          if (mask[ch]) out[p][ch][i] += f.c[k] * b[ch].d[0];
      }
    }
  return out;
}

}  // namespace xgnn
