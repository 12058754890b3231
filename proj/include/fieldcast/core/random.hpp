#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "fieldcast/core/tensor.hpp"

namespace fieldcast {

// FNV-1a; used to derive decorrelated RNG streams from one run seed.
inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::mt19937_64 seeded_engine(uint64_t seed, std::string_view stream) {
  std::seed_seq seq{seed, fnv1a(stream)};
  return std::mt19937_64(seq);
}

namespace nn {

template <class T>
void he_normal_fill(Tensor<T>& t, int64_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(dist(rng));
}

template <class T>
void normal_fill(Tensor<T>& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(dist(rng));
}

}  // namespace nn
}  // namespace fieldcast
