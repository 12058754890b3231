#pragma once

#include <cmath>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::fields {

// Confidence-weighted sum of unnormalized Gaussians, one per confident cell,
// centered at the offset-shifted cell position scaled to image space. The sum
// is linear in the confidences. Each Gaussian is truncated to a square window
// of trunc_sigmas * sigma; with the default 5 sigma the dropped tail mass
// stays below 1e-4 even when a full vicinity of votes stacks up.
inline AccumulatorMap accumulate(const LocalizationField& field, const FieldParams& params) {
  require(params.sigma > 0.0, "accumulate: sigma must be positive");
  require(params.p_floor >= 0.0 && params.p_floor < 1.0, "accumulate: p_floor must be in [0,1)");
  AccumulatorMap acc;
  const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
  const double radius = params.trunc_sigmas * params.sigma;
  std::vector<double> wx(kImageSize), wy(kImageSize);

  for (int j = 0; j < kFieldSize; ++j) {
    for (int i = 0; i < kFieldSize; ++i) {
      const double p = field.p(i, j);
      if (!(p > params.p_floor)) continue;
      const double mx = kUpscale * (i + static_cast<double>(field.dx(i, j)));
      const double my = kUpscale * (j + static_cast<double>(field.dy(i, j)));
      const int u0 = std::max(0, static_cast<int>(std::ceil(mx - radius)));
      const int u1 = std::min(kImageSize - 1, static_cast<int>(std::floor(mx + radius)));
      const int v0 = std::max(0, static_cast<int>(std::ceil(my - radius)));
      const int v1 = std::min(kImageSize - 1, static_cast<int>(std::floor(my + radius)));
      if (u0 > u1 || v0 > v1) continue;
      for (int u = u0; u <= u1; ++u) wx[static_cast<size_t>(u)] = std::exp(-(u - mx) * (u - mx) * inv2s2);
      for (int v = v0; v <= v1; ++v) wy[static_cast<size_t>(v)] = std::exp(-(v - my) * (v - my) * inv2s2);
      for (int v = v0; v <= v1; ++v) {
        const double pw = p * wy[static_cast<size_t>(v)];
        double* row = acc.h.data() + v * kImageSize;
        for (int u = u0; u <= u1; ++u) row[u] += pw * wx[static_cast<size_t>(u)];
      }
    }
  }
  return acc;
}

}  // namespace fieldcast::fields
