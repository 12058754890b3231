#pragma once

#include <vector>

#include "fieldcast/model/config.hpp"
#include "fieldcast/model/layers.hpp"

namespace fieldcast::model {

// Future motion decoder: consumes [X_i, L_{t-1}], runs two Conv-LSTM layers
// whose state persists across the prediction horizon, and emits the 3-channel
// localization and 5-channel association fields each step.
template <class T>
struct FutureMotionDecoder {
  nn::Conv2dLayer<T> in_conv;
  nn::ConvLSTMCell<T> lstm1, lstm2;
  nn::GroupNormLayer<T> gn1, gn2;
  nn::Conv2dLayer<T> loc_head, assoc_head;

  FutureMotionDecoder() = default;
  FutureMotionDecoder(const ModelConfig& cfg, std::mt19937_64& rng)
      : in_conv(cfg.fuse_channels + 3, cfg.dec_hidden, 3, 1, 1, rng),
        lstm1(cfg.dec_hidden, cfg.dec_hidden, cfg.lstm_kernel, rng),
        lstm2(cfg.dec_hidden, cfg.dec_hidden, cfg.lstm_kernel, rng),
        gn1(cfg.dec_hidden, cfg.gn_groups),
        gn2(cfg.dec_hidden, cfg.gn_groups),
        loc_head(cfg.dec_hidden, 3, 1, 1, 0, rng),
        assoc_head(cfg.dec_hidden, 5, 1, 1, 0, rng) {}

  struct State {
    typename nn::ConvLSTMCell<T>::State s1, s2;
  };

  State initial_state(int64_t h, int64_t w) const {
    return {lstm1.initial_state(h, w), lstm2.initial_state(h, w)};
  }

  struct StepOut {
    nn::Var<T> loc, assoc;
  };

  StepOut step(const nn::Var<T>& x_i, const nn::Var<T>& l_prev, State& state) const {
    nn::Var<T> x = nn::relu(in_conv(nn::concat_dim0(std::vector<nn::Var<T>>{x_i, l_prev})));
    state.s1 = lstm1.step(x, state.s1);
    nn::Var<T> f1 = gn1(state.s1.h);
    state.s2 = lstm2.step(f1, state.s2);
    nn::Var<T> f2 = gn2(state.s2.h);
    return {loc_head(f2), assoc_head(f2)};
  }

  void collect(nn::ParamList<T>& out, const std::string& prefix) {
    in_conv.collect(out, prefix + ".in");
    lstm1.collect(out, prefix + ".lstm1");
    lstm2.collect(out, prefix + ".lstm2");
    gn1.collect(out, prefix + ".gn1");
    gn2.collect(out, prefix + ".gn2");
    loc_head.collect(out, prefix + ".loc");
    assoc_head.collect(out, prefix + ".assoc");
  }
};

}  // namespace fieldcast::model
