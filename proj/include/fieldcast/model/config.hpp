#pragma once

#include <cstdint>
#include <string>

#include "fieldcast/core/error.hpp"

namespace fieldcast::model {

enum class Variant { kI1, kI2, kI3, kI4 };

inline Variant parse_variant(const std::string& s) {
  if (s == "I1") return Variant::kI1;
  if (s == "I2") return Variant::kI2;
  if (s == "I3") return Variant::kI3;
  if (s == "I4") return Variant::kI4;
  throw ConfigError("unknown interaction variant: " + s + " (expected I1..I4)");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kI1: return "I1";
    case Variant::kI2: return "I2";
    case Variant::kI3: return "I3";
    case Variant::kI4: return "I4";
  }
  return "?";
}

struct ModelConfig {
  Variant variant = Variant::kI3;

  // past motion encoder: two strided convs (256 -> 128 -> 64), then two
  // Conv-LSTM layers, each followed by a group norm
  int64_t enc_c1 = 16;
  int64_t enc_c2 = 32;
  int64_t lstm_hidden = 32;
  int64_t lstm_kernel = 3;
  int64_t gn_groups = 8;

  // interaction block
  int64_t nl_inter = 16;       // theta/phi/g projection width
  int64_t nl_pool = 1;         // spatial subsampling of the j-domain
  bool nl_distinct_phi = true; // separate theta/phi branches, as figured
  int64_t conv3d_channels = 32;
  int64_t fuse_channels = 64;  // width after time collapse + 1x1 fusion

  // semantic context extractor (4 convs, 256 -> 64)
  int64_t sem_c1 = 16;
  int64_t sem_c = 32;

  // future motion decoder
  int64_t dec_hidden = 32;

  int binary_map_radius = 10;  // Manhattan radius of input blobs, image px
  int64_t seed_pool = 4;       // 256 -> 64 pooling for the first L_prev

  void validate() const {
    require(enc_c1 > 0 && enc_c2 > 0 && lstm_hidden > 0 && dec_hidden > 0 && fuse_channels > 0,
            "ModelConfig: channel widths must be positive");
    require(lstm_kernel % 2 == 1, "ModelConfig: lstm_kernel must be odd");
    require(gn_groups >= 1 && lstm_hidden % gn_groups == 0 && dec_hidden % gn_groups == 0,
            "ModelConfig: gn_groups must divide the Conv-LSTM widths");
    require(nl_pool >= 1 && nl_inter > 0, "ModelConfig: bad non-local settings");
    require(binary_map_radius >= 0, "ModelConfig: negative rasterization radius");
    require(seed_pool >= 1, "ModelConfig: seed_pool must be >= 1");
  }
};

}  // namespace fieldcast::model
