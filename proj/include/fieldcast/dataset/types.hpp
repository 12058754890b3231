#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fieldcast/core/tensor.hpp"
#include "fieldcast/fields/field_types.hpp"

namespace fieldcast::dataset {

// Annotation cadence shared by all scenes after resampling.
inline constexpr double kStepSeconds = 0.4;

struct TrackPoint {
  int64_t frame = 0;
  double x = 0.0, y = 0.0;
};

// One contiguous observation of one agent: frame indices strictly increase by
// the scene's frame step. Tracks are split at annotation gaps, never
// interpolated.
struct AgentTrack {
  int64_t agent_id = 0;
  std::vector<TrackPoint> points;
};

// One training/evaluation window. Agents appear only if observed at every
// past step; future steps carry a per-agent validity mask.
struct Sample {
  std::string scene_id;
  int64_t start_frame = 0;
  std::vector<int64_t> agent_ids;
  std::vector<std::vector<fields::Vec2>> past;        // [t_obs][agent]
  std::vector<std::vector<fields::Vec2>> future;      // [t_pred][agent]
  std::vector<std::vector<bool>> future_valid;        // [t_pred][agent]

  int t_obs() const { return static_cast<int>(past.size()); }
  int t_pred() const { return static_cast<int>(future.size()); }
  size_t n_agents() const { return agent_ids.size(); }
};

// Five multi-label binary masks at image resolution. A pixel may belong to
// several classes.
struct SemanticMap {
  static constexpr int kClasses = 5;
  static constexpr std::array<const char*, kClasses> kClassNames = {
      "walkable", "vegetation", "drivable", "nondrivable", "sidewalk"};

  nn::Tensor<float> masks{{kClasses, fields::kImageSize, fields::kImageSize}};
  bool synthetic = false;  // true when substituted by the all-walkable map

  static SemanticMap all_walkable() {
    SemanticMap m;
    m.synthetic = true;
    for (int j = 0; j < fields::kImageSize; ++j)
      for (int i = 0; i < fields::kImageSize; ++i) m.masks.at(0, j, i) = 1.0f;
    return m;
  }
};

enum class AnnotationFormat { kEthUcy, kSdd };

struct SceneConfig {
  std::string id;
  std::string annotation_path;
  AnnotationFormat format = AnnotationFormat::kEthUcy;
  double extent_w = fields::kImageSize, extent_h = fields::kImageSize;
  double origin_x = 0.0, origin_y = 0.0;
  double fps = 2.5;        // rate of the annotated rows, per second
  int64_t frame_step = 0;  // raw frame-id step between rows; 0 = auto-detect
  std::string semantic_dir;
};

struct SplitProtocol {
  enum class Kind { kLeaveOneOut, kSddStandard };
};

struct SplitPlan {
  std::vector<std::string> train_scenes;
  std::string test_scene;
  SplitProtocol::Kind protocol = SplitProtocol::Kind::kLeaveOneOut;
};

}  // namespace fieldcast::dataset
