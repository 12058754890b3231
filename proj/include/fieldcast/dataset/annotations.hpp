#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/dataset/types.hpp"

namespace fieldcast::dataset {

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double parse_num(const std::string& tok, const std::string& path, size_t line_no) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(line_no) + ": malformed value '" + tok + "'");
  }
}

}  // namespace detail

// Most frequent positive frame delta across all tracks; 0 when undecidable.
inline int64_t detect_frame_step(const std::vector<AgentTrack>& tracks) {
  std::map<int64_t, int64_t> counts;
  for (const auto& tr : tracks)
    for (size_t i = 1; i < tr.points.size(); ++i) {
      const int64_t d = tr.points[i].frame - tr.points[i - 1].frame;
      if (d > 0) ++counts[d];
    }
  int64_t best = 0, best_count = 0;
  for (auto [d, c] : counts)
    if (c > best_count) {
      best = d;
      best_count = c;
    }
  return best;
}

// Splits a frame-sorted point list wherever consecutive frames do not differ
// by exactly `frame_step`.
inline std::vector<AgentTrack> split_at_gaps(const AgentTrack& track, int64_t frame_step) {
  std::vector<AgentTrack> out;
  if (track.points.empty()) return out;
  AgentTrack cur{track.agent_id, {track.points.front()}};
  for (size_t i = 1; i < track.points.size(); ++i) {
    if (track.points[i].frame - track.points[i - 1].frame != frame_step) {
      out.push_back(std::move(cur));
      cur = {track.agent_id, {}};
    }
    cur.points.push_back(track.points[i]);
  }
  out.push_back(std::move(cur));
  return out;
}

// Reads raw annotations, groups rows by agent and frame order, then splits at
// gaps. Coordinates are returned untouched (world or pixel units).
//
// ethucy: whitespace-separated `frame_id agent_id x y`
// sdd:    native 10-column rows `track xmin ymin xmax ymax frame lost ...`;
//         the position is the box center and rows flagged lost are dropped.
inline std::vector<AgentTrack> load_annotations(const std::string& path, AnnotationFormat format,
                                                int64_t frame_step = 0) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotation file: " + path);

  std::map<int64_t, std::vector<TrackPoint>> by_agent;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    int64_t agent;
    TrackPoint pt;
    if (format == AnnotationFormat::kEthUcy) {
      if (toks.size() < 4)
        throw DataError(path + ":" + std::to_string(line_no) + ": expected 4 columns");
      pt.frame = static_cast<int64_t>(std::llround(detail::parse_num(toks[0], path, line_no)));
      agent = static_cast<int64_t>(std::llround(detail::parse_num(toks[1], path, line_no)));
      pt.x = detail::parse_num(toks[2], path, line_no);
      pt.y = detail::parse_num(toks[3], path, line_no);
    } else {
      if (toks.size() < 6)
        throw DataError(path + ":" + std::to_string(line_no) + ": expected >= 6 columns");
      agent = static_cast<int64_t>(std::llround(detail::parse_num(toks[0], path, line_no)));
      const double xmin = detail::parse_num(toks[1], path, line_no);
      const double ymin = detail::parse_num(toks[2], path, line_no);
      const double xmax = detail::parse_num(toks[3], path, line_no);
      const double ymax = detail::parse_num(toks[4], path, line_no);
      pt.frame = static_cast<int64_t>(std::llround(detail::parse_num(toks[5], path, line_no)));
      if (toks.size() >= 7 && toks[6] == "1") continue;  // lost: outside of view
      pt.x = 0.5 * (xmin + xmax);
      pt.y = 0.5 * (ymin + ymax);
    }
    by_agent[agent].push_back(pt);
  }

  std::vector<AgentTrack> merged;
  for (auto& [agent, pts] : by_agent) {
    std::sort(pts.begin(), pts.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
    for (size_t i = 1; i < pts.size(); ++i)
      if (pts[i].frame == pts[i - 1].frame)
        throw DataError(path + ": duplicate frame " + std::to_string(pts[i].frame) +
                        " for agent " + std::to_string(agent));
    merged.push_back({agent, std::move(pts)});
  }

  if (frame_step <= 0) frame_step = detect_frame_step(merged);
  std::vector<AgentTrack> out;
  for (const auto& tr : merged) {
    if (frame_step <= 0) {
      out.push_back(tr);  // single-point tracks only; nothing to split
      continue;
    }
    for (auto& seg : split_at_gaps(tr, frame_step)) out.push_back(std::move(seg));
  }
  return out;
}

// Keeps every k-th annotation frame so the effective cadence matches the
// 0.4 s step (SDD annotates per video frame).
inline std::vector<AgentTrack> resample_tracks(const std::vector<AgentTrack>& tracks,
                                               int64_t keep_every) {
  require(keep_every >= 1, "resample_tracks: keep_every must be >= 1");
  if (keep_every == 1) return tracks;
  std::vector<AgentTrack> out;
  for (const auto& tr : tracks) {
    AgentTrack r{tr.agent_id, {}};
    for (const auto& pt : tr.points)
      if (pt.frame % keep_every == 0) r.points.push_back(pt);
    if (!r.points.empty()) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fieldcast::dataset
