#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/core/tensor.hpp"
#include "fieldcast/dataset/types.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::model {

// Binary occupancy of one time step: pixel (u,v) is 1 iff some agent position
// lies within the Manhattan radius. Overlapping agents just union.
template <class T>
nn::Tensor<T> rasterize_step(std::span<const fields::Vec2> positions, int radius) {
  constexpr int n = fields::kImageSize;
  nn::Tensor<T> map({1, n, n});
  for (const auto& p : positions) {
    require(p.x >= 0.0 && p.x < n && p.y >= 0.0 && p.y < n,
            "rasterize_step: position outside [0,256)");
    const int u0 = std::max(0, static_cast<int>(std::ceil(p.x - radius)));
    const int u1 = std::min(n - 1, static_cast<int>(std::floor(p.x + radius)));
    for (int u = u0; u <= u1; ++u) {
      const double rem = radius - std::abs(u - p.x);
      const int v0 = std::max(0, static_cast<int>(std::ceil(p.y - rem)));
      const int v1 = std::min(n - 1, static_cast<int>(std::floor(p.y + rem)));
      for (int v = v0; v <= v1; ++v) map.at(0, v, u) = T(1);
    }
  }
  return map;
}

template <class T>
std::vector<nn::Tensor<T>> rasterize_past(const dataset::Sample& sample, int radius) {
  std::vector<nn::Tensor<T>> maps;
  maps.reserve(sample.past.size());
  for (const auto& step : sample.past) maps.push_back(rasterize_step<T>(step, radius));
  return maps;
}

// The decoder's first L_prev: the last observation map average-pooled to the
// field resolution and repeated over the 3 localization channels.
template <class T>
nn::Tensor<T> seed_map(const nn::Tensor<T>& last_binary_map, int64_t pool) {
  const int64_t n = last_binary_map.size(1);
  const int64_t m = n / pool;
  nn::Tensor<T> seed({3, m, m});
  const T inv = T(1) / static_cast<T>(pool * pool);
  for (int64_t j = 0; j < m; ++j)
    for (int64_t i = 0; i < m; ++i) {
      T s = T(0);
      for (int64_t dj = 0; dj < pool; ++dj)
        for (int64_t di = 0; di < pool; ++di) s += last_binary_map.at(0, j * pool + dj, i * pool + di);
      const T v = s * inv;
      seed.at(0, j, i) = v;
      seed.at(1, j, i) = v;
      seed.at(2, j, i) = v;
    }
  return seed;
}

}  // namespace fieldcast::model
