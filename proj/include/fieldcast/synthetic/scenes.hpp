#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/core/random.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::synthetic {

struct SceneSpec {
  int n_agents = 4;
  int t_total = 13;          // steps per track, including the seed step
  uint64_t seed = 0;
  double max_step = 8.0;     // per-step displacement bound, image px
  double min_separation = 14.0;
  double margin = 16.0;      // keep-out border, image px
  bool sinusoidal = true;    // mix sinusoidal tracks in with linear ones
};

// Deterministic multi-agent scenes: straight or gently weaving tracks that
// respect a per-step displacement bound and pairwise separation at every
// step. Used for codec round-trips, benchmarks and the overfit training set.
inline std::vector<std::vector<fields::Vec2>> make_tracks(const SceneSpec& spec) {
  require(spec.n_agents >= 0 && spec.t_total >= 1, "make_tracks: bad spec");
  auto rng = seeded_engine(spec.seed, "synthetic-scene");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double lo = spec.margin, hi = fields::kImageSize - spec.margin;
  std::vector<std::vector<fields::Vec2>> tracks;

  auto propose = [&](double speed_cap) {
    std::vector<fields::Vec2> tr(static_cast<size_t>(spec.t_total));
    const double sx = lo + (hi - lo) * unit(rng);
    const double sy = lo + (hi - lo) * unit(rng);
    const double speed = speed_cap * (0.15 + 0.85 * unit(rng));
    const double heading = 2.0 * std::numbers::pi * unit(rng);
    const double vx = speed * std::cos(heading), vy = speed * std::sin(heading);
    double amp = 0.0, period = 12.0, phase = 0.0;
    if (spec.sinusoidal && unit(rng) < 0.5) {
      period = 6.0 + 10.0 * unit(rng);
      // keep combined per-step displacement under the bound
      const double lateral_cap =
          std::max(0.0, (spec.max_step - 0.1) - speed) * period / (2.0 * std::numbers::pi);
      amp = lateral_cap * unit(rng);
      phase = 2.0 * std::numbers::pi * unit(rng);
    }
    const double nx = -std::sin(heading), ny = std::cos(heading);
    for (int t = 0; t < spec.t_total; ++t) {
      const double sway =
          amp * (std::sin(2.0 * std::numbers::pi * t / period + phase) - std::sin(phase));
      tr[static_cast<size_t>(t)] = {sx + vx * t + sway * nx, sy + vy * t + sway * ny};
    }
    return tr;
  };

  auto acceptable = [&](const std::vector<fields::Vec2>& tr) {
    for (int t = 0; t < spec.t_total; ++t) {
      const auto& p = tr[static_cast<size_t>(t)];
      if (p.x < lo || p.x > hi || p.y < lo || p.y > hi) return false;
      if (t > 0) {
        const double d2 = fields::dist2(p, tr[static_cast<size_t>(t - 1)]);
        if (d2 > spec.max_step * spec.max_step) return false;
      }
      for (const auto& other : tracks) {
        if (fields::dist2(p, other[static_cast<size_t>(t)]) <
            spec.min_separation * spec.min_separation)
          return false;
      }
    }
    return true;
  };

  for (int a = 0; a < spec.n_agents; ++a) {
    bool placed = false;
    double cap = std::min(spec.max_step - 0.5, 6.0);
    for (int relax = 0; relax < 4 && !placed; ++relax, cap *= 0.4) {
      for (int attempt = 0; attempt < 800; ++attempt) {
        auto tr = propose(cap);
        if (acceptable(tr)) {
          tracks.push_back(std::move(tr));
          placed = true;
          break;
        }
      }
    }
    require(placed, "make_tracks: could not place agent (scene too crowded)");
  }
  return tracks;
}

// positions of all agents at one step
inline std::vector<fields::Vec2> at_step(const std::vector<std::vector<fields::Vec2>>& tracks,
                                         int t) {
  std::vector<fields::Vec2> out;
  out.reserve(tracks.size());
  for (const auto& tr : tracks) out.push_back(tr[static_cast<size_t>(t)]);
  return out;
}

}  // namespace fieldcast::synthetic
