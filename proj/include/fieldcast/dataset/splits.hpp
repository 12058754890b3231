#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/dataset/types.hpp"

namespace fieldcast::dataset {

// One fold per scene: train on the rest, test on the held-out scene.
inline std::vector<SplitPlan> leave_one_out(std::vector<std::string> scene_ids) {
  require(!scene_ids.empty(), "leave_one_out: no scenes");
  std::sort(scene_ids.begin(), scene_ids.end());
  std::vector<SplitPlan> folds;
  for (const auto& test : scene_ids) {
    SplitPlan plan;
    plan.protocol = SplitProtocol::Kind::kLeaveOneOut;
    plan.test_scene = test;
    for (const auto& s : scene_ids)
      if (s != test) plan.train_scenes.push_back(s);
    folds.push_back(std::move(plan));
  }
  return folds;
}

inline SplitPlan explicit_split(std::vector<std::string> train, std::string test,
                                SplitProtocol::Kind kind = SplitProtocol::Kind::kSddStandard) {
  SplitPlan plan;
  plan.protocol = kind;
  plan.train_scenes = std::move(train);
  plan.test_scene = std::move(test);
  for (const auto& s : plan.train_scenes)
    require(s != plan.test_scene, "explicit_split: test scene appears in training set");
  return plan;
}

}  // namespace fieldcast::dataset
