#pragma once

#include <string>
#include <vector>

#include "fieldcast/core/ops.hpp"
#include "fieldcast/core/random.hpp"

namespace fieldcast::nn {

template <class T>
struct ParamRef {
  std::string name;
  Var<T>* var;
};

template <class T>
using ParamList = std::vector<ParamRef<T>>;

template <class T>
struct Conv2dLayer {
  Var<T> w, b;
  int64_t stride = 1, pad = 0;

  Conv2dLayer() = default;
  Conv2dLayer(int64_t cin, int64_t cout, int64_t k, int64_t stride_, int64_t pad_,
              std::mt19937_64& rng, bool bias = true)
      : stride(stride_), pad(pad_) {
    Tensor<T> wt({cout, cin, k, k});
    he_normal_fill(wt, cin * k * k, rng);
    w = Var<T>::param(std::move(wt));
    if (bias) b = Var<T>::param(Tensor<T>({cout}));
  }

  Var<T> operator()(const Var<T>& x) const { return conv2d(x, w, b, stride, pad); }

  void collect(ParamList<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w});
    if (b.defined()) out.push_back({prefix + ".b", &b});
  }
};

template <class T>
struct Conv3dLayer {
  Var<T> w, b;

  Conv3dLayer() = default;
  Conv3dLayer(int64_t cin, int64_t cout, int64_t k, std::mt19937_64& rng) {
    Tensor<T> wt({cout, cin, k, k, k});
    he_normal_fill(wt, cin * k * k * k, rng);
    w = Var<T>::param(std::move(wt));
    b = Var<T>::param(Tensor<T>({cout}));
  }

  Var<T> operator()(const Var<T>& x) const { return conv3d_same(x, w, b); }

  void collect(ParamList<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w});
    out.push_back({prefix + ".b", &b});
  }
};

template <class T>
struct GroupNormLayer {
  Var<T> gamma, beta;
  int64_t groups = 1;

  GroupNormLayer() = default;
  GroupNormLayer(int64_t channels, int64_t groups_) : groups(groups_) {
    gamma = Var<T>::param(Tensor<T>::full({channels}, T(1)));
    beta = Var<T>::param(Tensor<T>({channels}));
  }

  Var<T> operator()(const Var<T>& x) const { return group_norm(x, gamma, beta, groups); }

  void collect(ParamList<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".gamma", &gamma});
    out.push_back({prefix + ".beta", &beta});
  }
};

// Channel projection over flattened positions: y = W x (+ b), x of shape (Cin, P).
template <class T>
struct ChannelProj {
  Var<T> w, b;

  ChannelProj() = default;
  ChannelProj(int64_t cin, int64_t cout, std::mt19937_64& rng, bool bias = true) {
    Tensor<T> wt({cout, cin});
    he_normal_fill(wt, cin, rng);
    w = Var<T>::param(std::move(wt));
    if (bias) b = Var<T>::param(Tensor<T>({cout}));
  }

  Var<T> operator()(const Var<T>& x) const {
    Var<T> y = matmul(w, x);
    return b.defined() ? add_rowwise(y, b) : y;
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w});
    if (b.defined()) out.push_back({prefix + ".b", &b});
  }
};

// Peephole-free Conv-LSTM cell; gate order i, f, g, o. The forget-gate bias
// starts at 1.
template <class T>
struct ConvLSTMCell {
  Conv2dLayer<T> gates_x;  // Cin -> 4C, with bias
  Conv2dLayer<T> gates_h;  // C -> 4C, no bias
  int64_t hidden = 0;

  ConvLSTMCell() = default;
  ConvLSTMCell(int64_t cin, int64_t chidden, int64_t k, std::mt19937_64& rng)
      : gates_x(cin, 4 * chidden, k, 1, k / 2, rng, true),
        gates_h(chidden, 4 * chidden, k, 1, k / 2, rng, false),
        hidden(chidden) {
    for (int64_t i = hidden; i < 2 * hidden; ++i) gates_x.b.value()[i] = T(1);
  }

  struct State {
    Var<T> h, c;
  };

  State initial_state(int64_t height, int64_t width) const {
    return {Var<T>::constant(Tensor<T>({hidden, height, width})),
            Var<T>::constant(Tensor<T>({hidden, height, width}))};
  }

  State step(const Var<T>& x, const State& s) const {
    Var<T> gates = add(gates_x(x), gates_h(s.h));
    Var<T> i = sigmoid(slice_dim0(gates, 0, hidden));
    Var<T> f = sigmoid(slice_dim0(gates, hidden, 2 * hidden));
    Var<T> g = tanh(slice_dim0(gates, 2 * hidden, 3 * hidden));
    Var<T> o = sigmoid(slice_dim0(gates, 3 * hidden, 4 * hidden));
    Var<T> c = add(mul(f, s.c), mul(i, g));
    Var<T> h = mul(o, tanh(c));
    return {h, c};
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    gates_x.collect(out, prefix + ".gx");
    gates_h.collect(out, prefix + ".gh");
  }
};

}  // namespace fieldcast::nn
