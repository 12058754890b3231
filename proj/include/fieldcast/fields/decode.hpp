#pragma once

#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/fields/accumulate.hpp"
#include "fieldcast/fields/associate.hpp"
#include "fieldcast/fields/peaks.hpp"

namespace fieldcast::fields {

struct DecodedTrajectories {
  // positions[t][agent] in image space; associated[t][agent] is false where
  // the agent was carried by its forward estimate instead of a detection.
  std::vector<std::vector<Vec2>> positions;
  std::vector<std::vector<bool>> associated;

  size_t n_unassociated() const {
    size_t n = 0;
    for (const auto& step : associated)
      for (bool a : step)
        if (!a) ++n;
    return n;
  }
};

// Chains accumulate -> detect_peaks -> match per future step. Identity flows
// from the seeds (positions at the last observed step); the peak budget per
// step equals the seed count.
inline DecodedTrajectories decode_trajectories(const std::vector<LocalizationField>& loc,
                                               const std::vector<AssociationField>& assoc,
                                               const std::vector<Vec2>& seeds,
                                               const FieldParams& params) {
  require(loc.size() == assoc.size(), "decode_trajectories: field list length mismatch");
  DecodedTrajectories out;
  out.positions.resize(loc.size());
  out.associated.resize(loc.size());
  if (seeds.empty()) {
    for (auto& step : out.positions) step.clear();
    return out;
  }

  std::vector<Vec2> current = seeds;
  for (size_t t = 0; t < loc.size(); ++t) {
    const AccumulatorMap acc = accumulate(loc[t], params);
    const std::vector<Detection> dets =
        detect_peaks(acc, params.detect_threshold(), params.nms_window,
                     static_cast<int64_t>(seeds.size()), params.subpixel);
    MatchResult match = match_agents(assoc[t], current, dets, params);
    out.positions[t] = match.positions;
    out.associated[t] = match.associated;
    current = match.positions;
  }
  return out;
}

}  // namespace fieldcast::fields
