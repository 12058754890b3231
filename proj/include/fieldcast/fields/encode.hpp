#pragma once

#include <algorithm>
#include <limits>
#include <span>

#include "fieldcast/core/error.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::fields {

namespace detail {

inline void check_in_image(std::span<const Vec2> positions, const char* who) {
  for (const auto& p : positions)
    require(p.x >= 0.0 && p.x < kImageSize && p.y >= 0.0 && p.y < kImageSize,
            std::string(who) + ": position outside [0,256)");
}

// Visits every in-grid cell within Manhattan radius d0 of the agent's anchor
// cell (the floor of its 64-grid position).
template <class F>
void for_each_vicinity_cell(const Vec2& pos256, int d0, F&& f) {
  const double gx = pos256.x / kUpscale, gy = pos256.y / kUpscale;
  const int ci = static_cast<int>(std::floor(gx));
  const int cj = static_cast<int>(std::floor(gy));
  for (int dj = -d0; dj <= d0; ++dj) {
    const int j = cj + dj;
    if (j < 0 || j >= kFieldSize) continue;
    const int rem = d0 - std::abs(dj);
    for (int di = -rem; di <= rem; ++di) {
      const int i = ci + di;
      if (i < 0 || i >= kFieldSize) continue;
      f(i, j, gx, gy);
    }
  }
}

// Nearest-agent ownership of cells: Euclidean distance between the cell's
// lattice point and the agent's sub-cell 64-grid position; ties go to the
// lower agent index.
struct CellOwner {
  double d2 = std::numeric_limits<double>::infinity();
  int agent = -1;
};

template <class PosAt>
std::vector<CellOwner> assign_cells(size_t n_agents, PosAt&& pos_at, int d0) {
  std::vector<CellOwner> owner(kFieldSize * kFieldSize);
  for (size_t a = 0; a < n_agents; ++a) {
    for_each_vicinity_cell(pos_at(a), d0, [&](int i, int j, double gx, double gy) {
      const double ddx = gx - i, ddy = gy - j;
      const double d2 = ddx * ddx + ddy * ddy;
      CellOwner& o = owner[static_cast<size_t>(j * kFieldSize + i)];
      if (d2 < o.d2) o = {d2, static_cast<int>(a)};
    });
  }
  return owner;
}

}  // namespace detail

inline LocalizationField encode_localization(std::span<const Vec2> positions, int d0) {
  require(d0 >= 0, "encode_localization: d0 must be >= 0");
  detail::check_in_image(positions, "encode_localization");
  LocalizationField field;
  if (positions.empty()) return field;

  auto owner = detail::assign_cells(
      positions.size(), [&](size_t a) { return positions[a]; }, d0);
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) {
      const auto& o = owner[static_cast<size_t>(j * kFieldSize + i)];
      if (o.agent < 0) continue;
      const Vec2& p = positions[static_cast<size_t>(o.agent)];
      field.dx(i, j) = static_cast<float>(p.x / kUpscale - i);
      field.dy(i, j) = static_cast<float>(p.y / kUpscale - j);
      field.p(i, j) = 1.0f;
    }
  return field;
}

inline AssociationField encode_association(std::span<const Vec2> prev, std::span<const Vec2> curr,
                                           int d0) {
  require(prev.size() == curr.size(), "encode_association: prev/curr length mismatch");
  require(d0 >= 0, "encode_association: d0 must be >= 0");
  detail::check_in_image(prev, "encode_association");
  detail::check_in_image(curr, "encode_association");
  AssociationField field;
  if (curr.empty()) return field;

  // vicinity is anchored at the agent's current position
  auto owner = detail::assign_cells(
      curr.size(), [&](size_t a) { return curr[a]; }, d0);
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) {
      const auto& o = owner[static_cast<size_t>(j * kFieldSize + i)];
      if (o.agent < 0) continue;
      const Vec2& pp = prev[static_cast<size_t>(o.agent)];
      const Vec2& pc = curr[static_cast<size_t>(o.agent)];
      field.bx(i, j) = static_cast<float>(pp.x / kUpscale - i);
      field.by(i, j) = static_cast<float>(pp.y / kUpscale - j);
      field.fx(i, j) = static_cast<float>(pc.x / kUpscale - i);
      field.fy(i, j) = static_cast<float>(pc.y / kUpscale - j);
      field.p(i, j) = 1.0f;
    }
  return field;
}

}  // namespace fieldcast::fields
