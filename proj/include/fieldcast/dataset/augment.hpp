#pragma once

#include <cmath>
#include <string>

#include "fieldcast/core/error.hpp"
#include "fieldcast/dataset/types.hpp"

namespace fieldcast::dataset {

// Exact bijections of the 256x256 space about the image center. rot90 is
// counterclockwise in (x, y).
enum class AugmentOp { kIdentity, kHFlip, kVFlip, kRot90, kRot180, kRot270 };

inline AugmentOp inverse_op(AugmentOp op) {
  switch (op) {
    case AugmentOp::kRot90: return AugmentOp::kRot270;
    case AugmentOp::kRot270: return AugmentOp::kRot90;
    default: return op;  // identity and flips are involutions, as is rot180
  }
}

inline fields::Vec2 apply_op(AugmentOp op, const fields::Vec2& p) {
  constexpr double s = fields::kImageSize;
  // x == 0 maps onto the open edge; nudge back into [0, 256)
  auto in_range = [](double v) {
    return v >= static_cast<double>(fields::kImageSize)
               ? std::nextafter(static_cast<double>(fields::kImageSize), 0.0)
               : v;
  };
  fields::Vec2 q;
  switch (op) {
    case AugmentOp::kIdentity: return p;
    case AugmentOp::kHFlip: q = {s - p.x, p.y}; break;
    case AugmentOp::kVFlip: q = {p.x, s - p.y}; break;
    case AugmentOp::kRot90: q = {p.y, s - p.x}; break;
    case AugmentOp::kRot180: q = {s - p.x, s - p.y}; break;
    case AugmentOp::kRot270: q = {s - p.y, p.x}; break;
    default: throw ContractError("apply_op: bad op");
  }
  return {in_range(q.x), in_range(q.y)};
}

// Pixel-grid counterpart of apply_op: pixel centers (u+0.5, v+0.5) follow the
// continuous transform exactly.
inline SemanticMap apply_op(AugmentOp op, const SemanticMap& map) {
  constexpr int n = fields::kImageSize;
  if (op == AugmentOp::kIdentity) return map;
  SemanticMap out;
  out.synthetic = map.synthetic;
  for (int c = 0; c < SemanticMap::kClasses; ++c)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        int nx = x, ny = y;
        switch (op) {
          case AugmentOp::kHFlip: nx = n - 1 - x; ny = y; break;
          case AugmentOp::kVFlip: nx = x; ny = n - 1 - y; break;
          case AugmentOp::kRot90: nx = y; ny = n - 1 - x; break;
          case AugmentOp::kRot180: nx = n - 1 - x; ny = n - 1 - y; break;
          case AugmentOp::kRot270: nx = n - 1 - y; ny = x; break;
          case AugmentOp::kIdentity: break;
        }
        out.masks.at(c, ny, nx) = map.masks.at(c, y, x);
      }
  return out;
}

inline Sample apply_op(AugmentOp op, const Sample& sample) {
  Sample out = sample;
  for (auto& step : out.past)
    for (auto& p : step) p = apply_op(op, p);
  for (auto& step : out.future)
    for (auto& p : step) p = apply_op(op, p);
  return out;
}

inline std::pair<Sample, SemanticMap> augment(const Sample& sample, const SemanticMap& map,
                                              AugmentOp op) {
  return {apply_op(op, sample), apply_op(op, map)};
}

inline AugmentOp parse_augment_op(const std::string& name) {
  if (name == "identity") return AugmentOp::kIdentity;
  if (name == "hflip") return AugmentOp::kHFlip;
  if (name == "vflip") return AugmentOp::kVFlip;
  if (name == "rot90") return AugmentOp::kRot90;
  if (name == "rot180") return AugmentOp::kRot180;
  if (name == "rot270") return AugmentOp::kRot270;
  throw ConfigError("unknown augmentation op: " + name);
}

}  // namespace fieldcast::dataset
