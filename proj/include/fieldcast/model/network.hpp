#pragma once

#include <string>
#include <vector>

#include "fieldcast/model/decoder.hpp"
#include "fieldcast/model/encoder.hpp"
#include "fieldcast/model/interaction.hpp"
#include "fieldcast/model/rasterize.hpp"

namespace fieldcast::model {

// The full forecaster. One forward pass covers all agents at once: past
// occupancy maps in, one (localization, association) field pair out per
// future step. Weights are read-shared during inference; recurrent state is
// local to each call.
template <class T>
struct TrajectoryForecaster {
  ModelConfig cfg;
  int64_t t_obs = 8;
  PastMotionEncoder<T> encoder;
  SemanticContextNet<T> semantic;
  InteractionModule<T> interaction;
  FutureMotionDecoder<T> decoder;

  TrajectoryForecaster() = default;
  TrajectoryForecaster(const ModelConfig& config, int64_t t_obs_steps, uint64_t seed)
      : cfg(config), t_obs(t_obs_steps) {
    cfg.validate();
    auto rng = seeded_engine(seed, "model-init");
    encoder = PastMotionEncoder<T>(cfg, rng);
    semantic = SemanticContextNet<T>(cfg, rng);
    interaction = InteractionModule<T>(cfg, t_obs, rng);
    decoder = FutureMotionDecoder<T>(cfg, rng);
  }

  struct Rollout {
    std::vector<nn::Var<T>> loc;    // t_pred fields, (3,N,N)
    std::vector<nn::Var<T>> assoc;  // t_pred fields, (5,N,N)
  };

  nn::Var<T> encode_past(const std::vector<nn::Tensor<T>>& binary_maps) const {
    std::vector<nn::Var<T>> in;
    in.reserve(binary_maps.size());
    for (const auto& m : binary_maps) in.push_back(nn::Var<T>::constant(m));
    return encoder.encode(in);
  }

  // teacher_loc, when given, replaces the decoder's own localization output
  // as the next-step input (teacher forcing).
  Rollout forward(const std::vector<nn::Tensor<T>>& binary_maps, const nn::Tensor<T>& seed,
                  const nn::Tensor<T>& semantic_masks, int t_pred,
                  const std::vector<nn::Tensor<T>>* teacher_loc = nullptr) const {
    require(static_cast<int64_t>(binary_maps.size()) == t_obs,
            "TrajectoryForecaster: expected " + std::to_string(t_obs) + " past maps");
    require(t_pred >= 1, "TrajectoryForecaster: t_pred must be >= 1");
    if (teacher_loc)
      require(static_cast<int64_t>(teacher_loc->size()) == t_pred,
              "TrajectoryForecaster: teacher fields must cover t_pred");

    nn::Var<T> x_e = encode_past(binary_maps);
    nn::Var<T> psi;
    if (cfg.variant == Variant::kI4)
      psi = semantic(nn::Var<T>::constant(semantic_masks));
    nn::Var<T> x_i = interaction(x_e, psi);

    const int64_t n = x_i.value().size(1);
    auto state = decoder.initial_state(n, n);
    nn::Var<T> l_prev = nn::Var<T>::constant(seed);
    Rollout out;
    for (int t = 0; t < t_pred; ++t) {
      auto step = decoder.step(x_i, l_prev, state);
      out.loc.push_back(step.loc);
      out.assoc.push_back(step.assoc);
      l_prev = teacher_loc ? nn::Var<T>::constant((*teacher_loc)[static_cast<size_t>(t)])
                           : step.loc;
    }
    return out;
  }

  // Stacked batch encoding (B, C, T_obs, N, N); inference surface for shape
  // checks and callers that batch externally.
  nn::Tensor<T> encode_past_batch(
      const std::vector<std::vector<nn::Tensor<T>>>& batch_maps) const {
    require(!batch_maps.empty(), "encode_past_batch: empty batch");
    std::vector<nn::Tensor<T>> per_sample;
    for (const auto& maps : batch_maps) per_sample.push_back(encode_past(maps).value());
    const auto& s = per_sample[0].shape();
    nn::Tensor<T> out({static_cast<int64_t>(per_sample.size()), s[0], s[1], s[2], s[3]});
    const int64_t stride = per_sample[0].numel();
    for (size_t b = 0; b < per_sample.size(); ++b) {
      require(per_sample[b].shape() == s, "encode_past_batch: inconsistent shapes");
      std::copy(per_sample[b].data(), per_sample[b].data() + stride,
                out.data() + static_cast<int64_t>(b) * stride);
    }
    return out;
  }

  nn::ParamList<T> params() {
    nn::ParamList<T> out;
    encoder.collect(out, "enc");
    semantic.collect(out, "sem");
    interaction.collect(out, "inter");
    decoder.collect(out, "dec");
    return out;
  }
};

}  // namespace fieldcast::model
