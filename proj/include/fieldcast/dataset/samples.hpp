#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/dataset/annotations.hpp"
#include "fieldcast/dataset/types.hpp"

namespace fieldcast::dataset {

// Sliding windows over the scene's frame grid. An agent joins a sample only
// when observed at every past step; future steps are masked per agent.
// Windows with no fully-observed agent are dropped.
inline std::vector<Sample> make_samples(const std::vector<AgentTrack>& tracks,
                                        const std::string& scene_id, int t_obs, int t_pred,
                                        int stride = 1, int64_t frame_step = 0) {
  require(t_obs >= 1 && t_pred >= 1, "make_samples: t_obs and t_pred must be >= 1");
  require(stride >= 1, "make_samples: stride must be >= 1");
  std::vector<Sample> samples;
  if (tracks.empty()) return samples;

  if (frame_step <= 0) frame_step = detect_frame_step(tracks);
  if (frame_step <= 0) return samples;  // no track spans two frames

  // (agent, frame) -> position
  std::unordered_map<int64_t, std::map<int64_t, fields::Vec2>> presence;
  int64_t fmin = std::numeric_limits<int64_t>::max();
  int64_t fmax = std::numeric_limits<int64_t>::min();
  for (const auto& tr : tracks)
    for (const auto& pt : tr.points) {
      presence[tr.agent_id][pt.frame] = {pt.x, pt.y};
      fmin = std::min(fmin, pt.frame);
      fmax = std::max(fmax, pt.frame);
    }

  const int total = t_obs + t_pred;
  for (int64_t f0 = fmin; f0 + (total - 1) * frame_step <= fmax; f0 += stride * frame_step) {
    Sample s;
    s.scene_id = scene_id;
    s.start_frame = f0;
    for (const auto& [agent, frames] : presence) {
      bool full_past = true;
      for (int t = 0; t < t_obs && full_past; ++t)
        if (!frames.count(f0 + t * frame_step)) full_past = false;
      if (!full_past) continue;
      s.agent_ids.push_back(agent);
    }
    if (s.agent_ids.empty()) continue;
    std::sort(s.agent_ids.begin(), s.agent_ids.end());

    s.past.assign(static_cast<size_t>(t_obs), {});
    s.future.assign(static_cast<size_t>(t_pred), {});
    s.future_valid.assign(static_cast<size_t>(t_pred), {});
    for (int t = 0; t < t_obs; ++t) {
      auto& step = s.past[static_cast<size_t>(t)];
      for (int64_t agent : s.agent_ids)
        step.push_back(presence[agent].at(f0 + t * frame_step));
    }
    for (int t = 0; t < t_pred; ++t) {
      auto& step = s.future[static_cast<size_t>(t)];
      auto& valid = s.future_valid[static_cast<size_t>(t)];
      const int64_t f = f0 + (t_obs + t) * frame_step;
      for (int64_t agent : s.agent_ids) {
        auto it = presence[agent].find(f);
        if (it != presence[agent].end()) {
          step.push_back(it->second);
          valid.push_back(true);
        } else {
          step.push_back({0.0, 0.0});
          valid.push_back(false);
        }
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace fieldcast::dataset
