#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::fields {

// Forward-position estimate for one agent: among confident cells, take the
// one whose back-pointer lands closest to the agent's known position and read
// off its forward pointer. Ties on back-distance go to the lower row-major
// cell.
struct ForwardEstimate {
  bool valid = false;
  Vec2 estimate;
  double back_dist2 = std::numeric_limits<double>::infinity();
};

inline ForwardEstimate forward_estimate(const AssociationField& assoc, const Vec2& known_prev,
                                        double p_thresh) {
  ForwardEstimate best;
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) {
      if (!(assoc.p(i, j) > p_thresh)) continue;
      const Vec2 back{kUpscale * (i + static_cast<double>(assoc.bx(i, j))),
                      kUpscale * (j + static_cast<double>(assoc.by(i, j)))};
      const double d2 = dist2(back, known_prev);
      if (d2 < best.back_dist2) {
        best.valid = true;
        best.back_dist2 = d2;
        best.estimate = {kUpscale * (i + static_cast<double>(assoc.fx(i, j))),
                         kUpscale * (j + static_cast<double>(assoc.fy(i, j)))};
      }
    }
  return best;
}

// Single-agent association: candidate index nearest the forward estimate, or
// nullopt when no cell clears the confidence threshold or no candidates exist.
inline std::optional<size_t> associate(const AssociationField& assoc, const Vec2& known_prev,
                                       const std::vector<Detection>& candidates, double p_thresh) {
  const ForwardEstimate est = forward_estimate(assoc, known_prev, p_thresh);
  if (!est.valid || candidates.empty()) return std::nullopt;
  size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < candidates.size(); ++c) {
    const double d2 = dist2(candidates[c].pos, est.estimate);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

struct MatchResult {
  std::vector<Vec2> positions;      // one per agent
  std::vector<bool> associated;     // false: extended by the estimate or held
  std::vector<int> candidate_of;    // consumed candidate index, -1 if none
};

// One-to-one greedy matching across agents: agents are served in ascending
// order of the distance to their nearest remaining candidate; each candidate
// is consumed at most once. Agents left without a candidate continue on their
// forward estimate; agents without a confident cell hold their position.
inline MatchResult match_agents(const AssociationField& assoc, const std::vector<Vec2>& prev,
                                const std::vector<Detection>& candidates,
                                const FieldParams& params) {
  const size_t n = prev.size();
  MatchResult out;
  out.positions.resize(n);
  out.associated.assign(n, false);
  out.candidate_of.assign(n, -1);

  std::vector<ForwardEstimate> est(n);
  for (size_t a = 0; a < n; ++a) est[a] = forward_estimate(assoc, prev[a], params.assoc_p_thresh);

  std::vector<bool> consumed(candidates.size(), false);
  std::vector<bool> served(n, false);
  for (size_t a = 0; a < n; ++a)
    if (!est[a].valid) {
      out.positions[a] = prev[a];
      served[a] = true;
    }

  auto nearest_free = [&](size_t a) -> std::pair<int, double> {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < candidates.size(); ++c) {
      if (consumed[c]) continue;
      const double d2 = dist2(candidates[c].pos, est[a].estimate);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(c);
      }
    }
    return {best, best_d2};
  };

  while (true) {
    int pick_agent = -1, pick_cand = -1;
    double pick_d2 = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < n; ++a) {
      if (served[a]) continue;
      auto [c, d2] = nearest_free(a);
      if (c < 0) continue;
      if (d2 < pick_d2) {
        pick_d2 = d2;
        pick_agent = static_cast<int>(a);
        pick_cand = c;
      }
    }
    if (pick_agent < 0) break;
    consumed[static_cast<size_t>(pick_cand)] = true;
    served[static_cast<size_t>(pick_agent)] = true;
    out.positions[static_cast<size_t>(pick_agent)] = candidates[static_cast<size_t>(pick_cand)].pos;
    out.associated[static_cast<size_t>(pick_agent)] = true;
    out.candidate_of[static_cast<size_t>(pick_agent)] = pick_cand;
  }

  // candidates exhausted: extend by the forward estimate
  for (size_t a = 0; a < n; ++a)
    if (!served[a]) out.positions[a] = est[a].estimate;
  return out;
}

}  // namespace fieldcast::fields
