#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::fields {

namespace detail {

// One-axis sub-pixel refinement. The vote map around a ground-truth peak is a
// stack of co-centered Gaussians, so log H is locally an exact parabola.
inline double log_parabola_offset(double hm, double h0, double hp) {
  if (!(hm > 0.0) || !(h0 > 0.0) || !(hp > 0.0)) return 0.0;
  const double lm = std::log(hm), l0 = std::log(h0), lp = std::log(hp);
  const double denom = lm - 2.0 * l0 + lp;
  if (denom >= -1e-12) return 0.0;  // not a strict maximum of the parabola
  double off = 0.5 * (lm - lp) / denom;
  return std::clamp(off, -0.5, 0.5);
}

}  // namespace detail

// Thresholding followed by 2D non-maximum suppression: a pixel survives when
// it strictly dominates its Chebyshev window, with plateau ties broken toward
// the lowest row-major index. Results are sorted by descending score, then
// ascending row-major index, truncated to max_count.
inline std::vector<Detection> detect_peaks(const AccumulatorMap& acc, double threshold, int window,
                                           int64_t max_count, bool subpixel = true) {
  require(window >= 3 && window % 2 == 1, "detect_peaks: window must be odd and >= 3");
  const int r = window / 2;
  std::vector<Detection> found;
  if (max_count <= 0) return found;

  for (int v = 0; v < kImageSize; ++v) {
    for (int u = 0; u < kImageSize; ++u) {
      const double h0 = acc.at(u, v);
      if (h0 < threshold) continue;
      const int64_t idx0 = static_cast<int64_t>(v) * kImageSize + u;
      bool is_peak = true;
      for (int dv = -r; dv <= r && is_peak; ++dv) {
        const int vv = v + dv;
        if (vv < 0 || vv >= kImageSize) continue;
        for (int du = -r; du <= r; ++du) {
          const int uu = u + du;
          if (uu < 0 || uu >= kImageSize) continue;
          if (uu == u && vv == v) continue;
          const double hn = acc.at(uu, vv);
          const int64_t idxn = static_cast<int64_t>(vv) * kImageSize + uu;
          if (hn > h0 || (hn == h0 && idxn < idx0)) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;
      Vec2 pos{static_cast<double>(u), static_cast<double>(v)};
      if (subpixel && u > 0 && u < kImageSize - 1 && v > 0 && v < kImageSize - 1) {
        pos.x += detail::log_parabola_offset(acc.at(u - 1, v), h0, acc.at(u + 1, v));
        pos.y += detail::log_parabola_offset(acc.at(u, v - 1), h0, acc.at(u, v + 1));
      }
      found.push_back({pos, h0});
    }
  }
  std::sort(found.begin(), found.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    const int64_t ia = static_cast<int64_t>(std::lround(a.pos.y)) * kImageSize +
                       static_cast<int64_t>(std::lround(a.pos.x));
    const int64_t ib = static_cast<int64_t>(std::lround(b.pos.y)) * kImageSize +
                       static_cast<int64_t>(std::lround(b.pos.x));
    return ia < ib;
  });
  if (static_cast<int64_t>(found.size()) > max_count) found.resize(static_cast<size_t>(max_count));
  return found;
}

}  // namespace fieldcast::fields
