#pragma once

#include <string>
#include <vector>

#include "fieldcast/model/config.hpp"
#include "fieldcast/model/layers.hpp"

namespace fieldcast::model {

using nn::ParamList;
using nn::Var;

// Space-time non-local block with the concatenation-style pairwise function:
// f(z_i, z_j) = ReLU(w_a . theta(z_i) + w_b . phi(z_j) + bias), and
// q_i = (1/D) sum_j f(z_i, z_j) g(z_j) with D the number of j positions.
// phi/g may run on a spatially pooled copy of z to bound the pairwise cost;
// pool = 1 evaluates the exact all-positions sum.
template <class T>
struct NonLocalBlock {
  nn::ChannelProj<T> theta, phi, g;
  Var<T> w_a, w_b, w_bias;
  nn::ChannelProj<T> out_proj;  // maps q back to the input width; starts at zero
  int64_t pool = 1;
  bool distinct_phi = true;

  NonLocalBlock() = default;
  NonLocalBlock(int64_t channels, int64_t inter, int64_t pool_, bool distinct_phi_,
                std::mt19937_64& rng)
      : theta(channels, inter, rng),
        phi(channels, inter, rng),
        g(channels, inter, rng),
        out_proj(inter, channels, rng),
        pool(pool_),
        distinct_phi(distinct_phi_) {
    nn::Tensor<T> wa({1, inter}), wb({1, inter});
    nn::he_normal_fill(wa, inter, rng);
    nn::he_normal_fill(wb, inter, rng);
    w_a = Var<T>::param(std::move(wa));
    w_b = Var<T>::param(std::move(wb));
    w_bias = Var<T>::param(nn::Tensor<T>({1}));
    // the residual branch starts inert
    for (int64_t i = 0; i < out_proj.w.value().numel(); ++i) out_proj.w.value()[i] = T(0);
  }

  // q of shape (inter, P) for z of shape (C, T, H, W)
  Var<T> response(const Var<T>& z) const {
    const auto& s = z.value().shape();
    require(s.size() == 4, "NonLocalBlock: expects (C,T,H,W)");
    const int64_t c = s[0], tt = s[1], h = s[2], w = s[3];
    const int64_t pi = tt * h * w;

    Var<T> zi = nn::reshape(z, {c, pi});
    Var<T> zj = zi;
    int64_t pj = pi;
    if (pool > 1) {
      Var<T> zp = nn::avg_pool_spatial(z, pool);
      pj = tt * (h / pool) * (w / pool);
      zj = nn::reshape(zp, {c, pj});
    }

    Var<T> th = theta(zi);                                  // (I, Pi)
    Var<T> ph = distinct_phi ? phi(zj) : theta(zj);         // (I, Pj)
    Var<T> a = nn::add_rowwise(nn::matmul(w_a, th), w_bias);  // (1, Pi)
    Var<T> b = nn::matmul(w_b, ph);                           // (1, Pj)
    // build f transposed, (Pj, Pi), so the weighted sum is a single GEMM
    Var<T> f_t = nn::relu(nn::outer_add(nn::reshape(b, {pj}), nn::reshape(a, {pi})));
    Var<T> gj = g(zj);                                        // (I, Pj)
    return nn::scale(nn::matmul(gj, f_t), T(1) / static_cast<T>(pj));
  }

  // S(z): the response projected back to the input width and shape.
  Var<T> social(const Var<T>& z) const {
    const auto& s = z.value().shape();
    Var<T> q = response(z);
    return nn::reshape(out_proj(q), {s[0], s[1], s[2], s[3]});
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    theta.collect(out, prefix + ".theta");
    phi.collect(out, prefix + ".phi");
    g.collect(out, prefix + ".g");
    out.push_back({prefix + ".w_a", &w_a});
    out.push_back({prefix + ".w_b", &w_b});
    out.push_back({prefix + ".w_bias", &w_bias});
    out_proj.collect(out, prefix + ".out");
  }
};

// Interaction module. All variants emit a (C*T,N,N)-collapsed, 1x1-fused
// feature block for the decoder; they differ in the (C,T,N,N) features they
// collapse:
//   I1: X_e unchanged (plain concatenation over time)
//   I2: a small 3d conv net over X_e
//   I3: S(X_e) + X_e
//   I4: S(X_e) + E(X_e, psi) + X_e,  E = X_e ⊙ J, J = sigmoid(1x1(psi))
template <class T>
struct InteractionModule {
  Variant variant = Variant::kI3;
  NonLocalBlock<T> nonlocal;
  nn::Conv3dLayer<T> c3a, c3b;
  nn::Conv2dLayer<T> j_head;  // psi -> 1 channel attention logits
  nn::Conv2dLayer<T> fuse;    // (C*T) -> fuse_channels, 1x1

  InteractionModule() = default;
  InteractionModule(const ModelConfig& cfg, int64_t t_obs, std::mt19937_64& rng)
      : variant(cfg.variant),
        nonlocal(cfg.lstm_hidden, cfg.nl_inter, cfg.nl_pool, cfg.nl_distinct_phi, rng),
        c3a(cfg.lstm_hidden, cfg.conv3d_channels, 3, rng),
        c3b(cfg.conv3d_channels, cfg.lstm_hidden, 3, rng),
        j_head(cfg.sem_c, 1, 1, 1, 0, rng),
        fuse(cfg.lstm_hidden * t_obs, cfg.fuse_channels, 1, 1, 0, rng) {}

  Var<T> attention_map(const Var<T>& psi) const { return nn::sigmoid(j_head(psi)); }

  // Pre-fusion interaction features, same shape as x_e.
  Var<T> features(const Var<T>& x_e, const Var<T>& psi) const {
    switch (variant) {
      case Variant::kI1:
        return x_e;
      case Variant::kI2:
        return nn::relu(c3b(nn::relu(c3a(x_e))));
      case Variant::kI3:
        return nn::add(nonlocal.social(x_e), x_e);
      case Variant::kI4: {
        require(psi.defined(), "InteractionModule: I4 requires semantic features");
        return features_with_attention(x_e, attention_map(psi));
      }
    }
    throw ContractError("InteractionModule: bad variant");
  }

  // I4 composition with an explicit attention map (also the algebraic test
  // surface: J = 0 reduces to I3, J = 1 adds one extra residual copy).
  Var<T> features_with_attention(const Var<T>& x_e, const Var<T>& attention) const {
    Var<T> social = nonlocal.social(x_e);
    Var<T> env = nn::mul_mask_hw(x_e, attention);
    return nn::add(nn::add(social, env), x_e);
  }

  // Collapse time into channels and fuse; the decoder consumes this.
  Var<T> operator()(const Var<T>& x_e, const Var<T>& psi) const {
    Var<T> feat = features(x_e, psi);
    const auto& s = feat.value().shape();
    Var<T> flat = nn::reshape(feat, {s[0] * s[1], s[2], s[3]});
    return nn::relu(fuse(flat));
  }

  void collect(ParamList<T>& out, const std::string& prefix) {
    // every branch registers regardless of variant so checkpoints stay
    // architecture-complete
    nonlocal.collect(out, prefix + ".nl");
    c3a.collect(out, prefix + ".c3a");
    c3b.collect(out, prefix + ".c3b");
    j_head.collect(out, prefix + ".j");
    fuse.collect(out, prefix + ".fuse");
  }
};

}  // namespace fieldcast::model
