#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fieldcast/core/tensor.hpp"

namespace fieldcast::fields {

// Image space is 256x256; fields are predicted on a 64x64 grid. A field cell
// (i,j) sits at 64-grid coordinates (i,j); image coordinates are 4x that.
inline constexpr int kImageSize = 256;
inline constexpr int kFieldSize = 64;
inline constexpr int kUpscale = kImageSize / kFieldSize;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist2(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// 3 channels (dx, dy, p) on the 64-grid; offsets in cell units, stored [c][j][i]
// with i the x index and j the y index. Cells outside every agent's vicinity
// stay all-zero.
struct LocalizationField {
  nn::Tensor<float> grid{{3, kFieldSize, kFieldSize}};

  float& dx(int i, int j) { return grid.at(0, j, i); }
  float& dy(int i, int j) { return grid.at(1, j, i); }
  float& p(int i, int j) { return grid.at(2, j, i); }
  float dx(int i, int j) const { return grid.at(0, j, i); }
  float dy(int i, int j) const { return grid.at(1, j, i); }
  float p(int i, int j) const { return grid.at(2, j, i); }
};

// 5 channels (bx, by, fx, fy, p): back offsets point to the agent's position
// at t-1, forward offsets to its position at t, both in 64-grid cell units.
struct AssociationField {
  nn::Tensor<float> grid{{5, kFieldSize, kFieldSize}};

  float& bx(int i, int j) { return grid.at(0, j, i); }
  float& by(int i, int j) { return grid.at(1, j, i); }
  float& fx(int i, int j) { return grid.at(2, j, i); }
  float& fy(int i, int j) { return grid.at(3, j, i); }
  float& p(int i, int j) { return grid.at(4, j, i); }
  float bx(int i, int j) const { return grid.at(0, j, i); }
  float by(int i, int j) const { return grid.at(1, j, i); }
  float fx(int i, int j) const { return grid.at(2, j, i); }
  float fy(int i, int j) const { return grid.at(3, j, i); }
  float p(int i, int j) const { return grid.at(4, j, i); }
};

// Confidence-weighted Gaussian vote map at image resolution, stored [v][u].
struct AccumulatorMap {
  std::vector<double> h = std::vector<double>(kImageSize * kImageSize, 0.0);

  double& at(int u, int v) { return h[static_cast<size_t>(v * kImageSize + u)]; }
  double at(int u, int v) const { return h[static_cast<size_t>(v * kImageSize + u)]; }
};

struct Detection {
  Vec2 pos;      // image space
  double score;  // peak height of H
};

struct FieldParams {
  int d0 = 3;                      // vicinity Manhattan radius, in cells
  double sigma = 4.0;              // Gaussian std of the vote map, image px
  double p_floor = 0.1;            // cells at or below this confidence are skipped
  double trunc_sigmas = 5.0;       // vote truncation radius as multiple of sigma
  int nms_window = 7;              // odd Chebyshev suppression window
  double detect_threshold_frac = 0.3;
  double assoc_p_thresh = 0.5;
  bool subpixel = true;

  // Peak height of an interior agent in a ground-truth map: every vicinity
  // cell votes with p=1 exactly at the agent position.
  double expected_peak() const { return 2.0 * d0 * (d0 + 1) + 1.0; }
  double detect_threshold() const { return detect_threshold_frac * expected_peak(); }
};

}  // namespace fieldcast::fields
