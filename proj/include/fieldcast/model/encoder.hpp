#pragma once

#include <vector>

#include "fieldcast/dataset/types.hpp"
#include "fieldcast/model/config.hpp"
#include "fieldcast/model/layers.hpp"

namespace fieldcast::model {

using nn::ParamList;
using nn::Var;

// Past motion encoder: per-step strided convs (256 -> 64) feeding two
// Conv-LSTM layers. The per-step outputs of the last Conv-LSTM (after its
// norm) are stacked on a time axis to form X_e of shape (C, T_obs, N, N).
template <class T>
struct PastMotionEncoder {
  nn::Conv2dLayer<T> conv1, conv2;
  nn::ConvLSTMCell<T> lstm1, lstm2;
  nn::GroupNormLayer<T> gn1, gn2;

  PastMotionEncoder() = default;
  PastMotionEncoder(const ModelConfig& cfg, std::mt19937_64& rng)
      : conv1(1, cfg.enc_c1, 3, 2, 1, rng),
        conv2(cfg.enc_c1, cfg.enc_c2, 3, 2, 1, rng),
        lstm1(cfg.enc_c2, cfg.lstm_hidden, cfg.lstm_kernel, rng),
        lstm2(cfg.lstm_hidden, cfg.lstm_hidden, cfg.lstm_kernel, rng),
        gn1(cfg.lstm_hidden, cfg.gn_groups),
        gn2(cfg.lstm_hidden, cfg.gn_groups) {}

  Var<T> encode(const std::vector<Var<T>>& binary_maps) const {
    require(!binary_maps.empty(), "PastMotionEncoder: no input maps");
    const int64_t n = binary_maps[0].value().size(1) / 4;
    auto s1 = lstm1.initial_state(n, n);
    auto s2 = lstm2.initial_state(n, n);
    std::vector<Var<T>> steps;
    steps.reserve(binary_maps.size());
    for (const auto& m : binary_maps) {
      Var<T> x = nn::relu(conv1(m));
      x = nn::relu(conv2(x));
      s1 = lstm1.step(x, s1);
      Var<T> f1 = gn1(s1.h);
      s2 = lstm2.step(f1, s2);
      steps.push_back(gn2(s2.h));
    }
    return nn::stack_time(steps);
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    conv1.collect(out, prefix + ".conv1");
    conv2.collect(out, prefix + ".conv2");
    lstm1.collect(out, prefix + ".lstm1");
    lstm2.collect(out, prefix + ".lstm2");
    gn1.collect(out, prefix + ".gn1");
    gn2.collect(out, prefix + ".gn2");
  }
};

// Semantic context extractor: 4 convolutions taking the 5-class mask stack
// from image resolution down to the field resolution.
template <class T>
struct SemanticContextNet {
  nn::Conv2dLayer<T> c1, c2, c3, c4;

  SemanticContextNet() = default;
  SemanticContextNet(const ModelConfig& cfg, std::mt19937_64& rng)
      : c1(dataset::SemanticMap::kClasses, cfg.sem_c1, 3, 2, 1, rng),
        c2(cfg.sem_c1, cfg.sem_c, 3, 2, 1, rng),
        c3(cfg.sem_c, cfg.sem_c, 3, 1, 1, rng),
        c4(cfg.sem_c, cfg.sem_c, 3, 1, 1, rng) {}

  Var<T> operator()(const Var<T>& masks) const {
    Var<T> x = nn::relu(c1(masks));
    x = nn::relu(c2(x));
    x = nn::relu(c3(x));
    return nn::relu(c4(x));
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    c1.collect(out, prefix + ".c1");
    c2.collect(out, prefix + ".c2");
    c3.collect(out, prefix + ".c3");
    c4.collect(out, prefix + ".c4");
  }
};

}  // namespace fieldcast::model
