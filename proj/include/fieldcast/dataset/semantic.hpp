#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fieldcast/dataset/types.hpp"
#include "fieldcast/io/png_io.hpp"

namespace fieldcast::dataset {

namespace detail {

// Nearest-neighbor resample onto the 256 grid; masks are categorical so no
// filtering is wanted.
inline void fill_channel(SemanticMap& map, int channel, const io::ImageGray& img) {
  constexpr int n = fields::kImageSize;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const int sx = std::min(img.width - 1, x * img.width / n);
      const int sy = std::min(img.height - 1, y * img.height / n);
      map.masks.at(channel, y, x) = img.at(sx, sy) > 127 ? 1.0f : 0.0f;
    }
}

}  // namespace detail

struct SemanticLoadResult {
  SemanticMap map;
  std::vector<std::string> missing;  // class names without a mask file
};

// Loads `<dir>/<scene>_<class>.png` per class. When no class file exists the
// all-walkable substitute is returned so the context branch degrades
// gracefully.
inline SemanticLoadResult load_semantic_map(const std::string& dir, const std::string& scene_id) {
  SemanticLoadResult res;
  namespace fs = std::filesystem;
  bool any = false;
  for (int c = 0; c < SemanticMap::kClasses; ++c) {
    const std::string name = scene_id + "_" + SemanticMap::kClassNames[static_cast<size_t>(c)];
    const fs::path png = fs::path(dir) / (name + ".png");
    if (!dir.empty() && fs::exists(png)) {
      detail::fill_channel(res.map, c, io::read_png_gray(png.string()));
      any = true;
    } else {
      res.missing.push_back(SemanticMap::kClassNames[static_cast<size_t>(c)]);
    }
  }
  if (!any) {
    res.map = SemanticMap::all_walkable();
    res.missing.clear();
    for (const char* n : SemanticMap::kClassNames) res.missing.push_back(n);
  }
  return res;
}

}  // namespace fieldcast::dataset
