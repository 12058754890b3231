#pragma once

#include <cmath>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/dataset/types.hpp"

namespace fieldcast::dataset {

// Affine map between scene units and the 256x256 image space, kept around so
// errors can be reported back in the original units.
struct SceneTransform {
  double sx = 1.0, sy = 1.0;    // scale into image space
  double ox = 0.0, oy = 0.0;    // scene-space origin

  fields::Vec2 to_image(const fields::Vec2& p) const {
    return {(p.x - ox) * sx, (p.y - oy) * sy};
  }
  fields::Vec2 to_scene(const fields::Vec2& p) const {
    return {p.x / sx + ox, p.y / sy + oy};
  }
};

struct NormalizedScene {
  std::vector<AgentTrack> tracks;
  SceneTransform transform;
  size_t clamped = 0;  // positions that fell outside the extent
};

// Scales positions by (256/w, 256/h) relative to the configured origin.
// Out-of-extent positions clamp to the half-open image box.
inline NormalizedScene normalize_scene(const std::vector<AgentTrack>& tracks, double extent_w,
                                       double extent_h, double origin_x = 0.0,
                                       double origin_y = 0.0) {
  require(extent_w > 0.0 && extent_h > 0.0, "normalize_scene: extent must be positive");
  NormalizedScene out;
  out.transform = {fields::kImageSize / extent_w, fields::kImageSize / extent_h, origin_x,
                   origin_y};
  const double hi = std::nextafter(static_cast<double>(fields::kImageSize), 0.0);
  out.tracks = tracks;
  for (auto& tr : out.tracks)
    for (auto& pt : tr.points) {
      const fields::Vec2 p = out.transform.to_image({pt.x, pt.y});
      double x = p.x, y = p.y;
      if (x < 0.0 || x > hi || y < 0.0 || y > hi) ++out.clamped;
      pt.x = std::clamp(x, 0.0, hi);
      pt.y = std::clamp(y, 0.0, hi);
    }
  return out;
}

}  // namespace fieldcast::dataset
