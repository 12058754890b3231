#include <catch2/catch_amalgamated.hpp>

#include "fieldcast/fields/decode.hpp"
#include "fieldcast/fields/encode.hpp"
#include "fieldcast/synthetic/scenes.hpp"

using namespace fieldcast;
using fields::AccumulatorMap;
using fields::AssociationField;
using fields::Detection;
using fields::FieldParams;
using fields::kFieldSize;
using fields::kImageSize;
using fields::kUpscale;
using fields::LocalizationField;
using fields::Vec2;

namespace {

// Dense untruncated evaluation of the vote map; the independent oracle for
// the truncated separable implementation.
AccumulatorMap accumulate_dense_oracle(const LocalizationField& f, double sigma, double p_floor) {
  AccumulatorMap acc;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) {
      const double p = f.p(i, j);
      if (!(p > p_floor)) continue;
      const double mx = kUpscale * (i + static_cast<double>(f.dx(i, j)));
      const double my = kUpscale * (j + static_cast<double>(f.dy(i, j)));
      for (int v = 0; v < kImageSize; ++v)
        for (int u = 0; u < kImageSize; ++u)
          acc.at(u, v) += p * std::exp(-((u - mx) * (u - mx) + (v - my) * (v - my)) * inv2s2);
    }
  return acc;
}

int count_nonzero_p(const LocalizationField& f) {
  int n = 0;
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i)
      if (f.p(i, j) != 0.0f) ++n;
  return n;
}

}  // namespace

TEST_CASE("encode_localization: exact cell center, d0=0") {
  std::vector<Vec2> pos{{40.0, 40.0}};  // 64-grid (10,10)
  auto f = fields::encode_localization(pos, 0);
  REQUIRE(count_nonzero_p(f) == 1);
  REQUIRE(f.p(10, 10) == 1.0f);
  REQUIRE(f.dx(10, 10) == 0.0f);
  REQUIRE(f.dy(10, 10) == 0.0f);
}

TEST_CASE("encode_localization: sub-cell agent, vicinity matches brute force") {
  const Vec2 agent{42.0, 39.0};  // 64-grid (10.5, 9.75), anchor cell (10,9)
  const int d0 = 1;
  std::vector<Vec2> pos{agent};
  auto f = fields::encode_localization(pos, d0);

  // brute-force enumeration over the whole grid
  int nonzero = 0;
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) {
      const bool in_vicinity = std::abs(i - 10) + std::abs(j - 9) <= d0;
      if (in_vicinity) {
        ++nonzero;
        REQUIRE(f.p(i, j) == 1.0f);
        REQUIRE(i + f.dx(i, j) == Catch::Approx(10.5).margin(1e-6));
        REQUIRE(j + f.dy(i, j) == Catch::Approx(9.75).margin(1e-6));
      } else {
        REQUIRE(f.p(i, j) == 0.0f);
        REQUIRE(f.dx(i, j) == 0.0f);
        REQUIRE(f.dy(i, j) == 0.0f);
      }
    }
  REQUIRE(nonzero == 5);
  REQUIRE(count_nonzero_p(f) == 5);
}

TEST_CASE("encode_localization: equidistant agents resolve to lower index") {
  // both agents 2 cells from (10,10), exactly symmetric
  std::vector<Vec2> pos{{32.0, 40.0}, {48.0, 40.0}};  // 64-grid (8,10) and (12,10)
  auto f = fields::encode_localization(pos, 3);
  REQUIRE(f.p(10, 10) == 1.0f);
  REQUIRE(10.0 + f.dx(10, 10) == Catch::Approx(8.0));  // points at agent 0
}

TEST_CASE("encode_localization: empty input, range check") {
  auto f = fields::encode_localization(std::vector<Vec2>{}, 3);
  REQUIRE(count_nonzero_p(f) == 0);
  std::vector<Vec2> bad{{-1.0, 10.0}};
  REQUIRE_THROWS_AS(fields::encode_localization(bad, 3), ContractError);
}

TEST_CASE("encode_association: stationary agent at cell center, d0=0") {
  std::vector<Vec2> p{{40.0, 40.0}};
  auto f = fields::encode_association(p, p, 0);
  REQUIRE(f.p(10, 10) == 1.0f);
  REQUIRE(f.bx(10, 10) == 0.0f);
  REQUIRE(f.by(10, 10) == 0.0f);
  REQUIRE(f.fx(10, 10) == 0.0f);
  REQUIRE(f.fy(10, 10) == 0.0f);
}

TEST_CASE("encode_association: moving agent offsets") {
  std::vector<Vec2> prev{{40.0, 40.0}}, curr{{44.0, 40.0}};
  auto f = fields::encode_association(prev, curr, 0);
  // anchored at current 64-grid cell (11,10)
  REQUIRE(f.p(11, 10) == 1.0f);
  REQUIRE(f.bx(11, 10) == Catch::Approx(-1.0));
  REQUIRE(f.by(11, 10) == Catch::Approx(0.0));
  REQUIRE(f.fx(11, 10) == Catch::Approx(0.0));
  REQUIRE(f.fy(11, 10) == Catch::Approx(0.0));
}

TEST_CASE("encode_association: empty input and length mismatch") {
  auto f = fields::encode_association(std::vector<Vec2>{}, std::vector<Vec2>{}, 3);
  double sum = 0;
  for (int64_t i = 0; i < f.grid.numel(); ++i) sum += std::abs(f.grid[i]);
  REQUIRE(sum == 0.0);
  std::vector<Vec2> one{{10, 10}};
  REQUIRE_THROWS_AS(fields::encode_association(one, std::vector<Vec2>{}, 3), ContractError);
}

TEST_CASE("accumulate: zero field stays zero") {
  LocalizationField f;
  FieldParams params;
  auto acc = fields::accumulate(f, params);
  for (double v : acc.h) REQUIRE(v == 0.0);
}

TEST_CASE("accumulate: single offset cell peaks at the pointed position") {
  LocalizationField f;
  f.dx(10, 10) = 0.5f;
  f.dy(10, 10) = -0.25f;
  f.p(10, 10) = 1.0f;
  FieldParams params;
  auto acc = fields::accumulate(f, params);

  // oracle: dense argmax
  auto oracle = accumulate_dense_oracle(f, params.sigma, params.p_floor);
  int best_u = -1, best_v = -1;
  double best = -1.0;
  for (int v = 0; v < kImageSize; ++v)
    for (int u = 0; u < kImageSize; ++u)
      if (oracle.at(u, v) > best) {
        best = oracle.at(u, v);
        best_u = u;
        best_v = v;
      }
  REQUIRE(std::abs(best_u - 42.0) <= 0.5);
  REQUIRE(std::abs(best_v - 39.0) <= 0.5);
  // truncated implementation agrees with the oracle everywhere
  double max_abs = 0.0;
  for (int v = 0; v < kImageSize; ++v)
    for (int u = 0; u < kImageSize; ++u)
      max_abs = std::max(max_abs, std::abs(acc.at(u, v) - oracle.at(u, v)));
  REQUIRE(max_abs < 1e-4);
}

TEST_CASE("accumulate: two votes on one target double the peak") {
  LocalizationField one, two;
  one.p(10, 10) = 1.0f;
  two.p(10, 10) = 1.0f;
  two.dx(11, 10) = -1.0f;  // cell (11,10) points back at (10,10)
  two.p(11, 10) = 1.0f;
  FieldParams params;
  auto acc1 = fields::accumulate(one, params);
  auto acc2 = fields::accumulate(two, params);
  REQUIRE(acc2.at(40, 40) == Catch::Approx(2.0 * acc1.at(40, 40)).epsilon(1e-12));
}

TEST_CASE("accumulate: linearity in confidence") {
  auto rng = seeded_engine(5, "lin");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LocalizationField f;
  for (int k = 0; k < 40; ++k) {
    const int i = static_cast<int>(unit(rng) * kFieldSize);
    const int j = static_cast<int>(unit(rng) * kFieldSize);
    f.dx(i, j) = static_cast<float>(unit(rng) * 2 - 1);
    f.dy(i, j) = static_cast<float>(unit(rng) * 2 - 1);
    f.p(i, j) = static_cast<float>(0.2 + 0.8 * unit(rng));
  }
  FieldParams params;
  params.p_floor = 0.0;
  const double alpha = 0.5;  // exactly representable so confidences scale exactly
  LocalizationField fa = f;
  for (int j = 0; j < kFieldSize; ++j)
    for (int i = 0; i < kFieldSize; ++i) fa.p(i, j) = static_cast<float>(alpha * f.p(i, j));
  auto acc = fields::accumulate(f, params);
  auto acca = fields::accumulate(fa, params);
  double max_rel = 0.0;
  for (size_t k = 0; k < acc.h.size(); ++k) {
    const double want = alpha * acc.h[k];
    max_rel = std::max(max_rel, std::abs(acca.h[k] - want) / std::max(1e-12, std::abs(want)));
  }
  REQUIRE(max_rel < 1e-12);
}

TEST_CASE("detect_peaks: single bump, two bumps, empty") {
  LocalizationField f;
  f.p(10, 10) = 1.0f;
  FieldParams params;
  auto acc = fields::accumulate(f, params);

  auto dets = fields::detect_peaks(acc, 0.5, 5, 10, false);
  REQUIRE(dets.size() == 1);
  REQUIRE(dets[0].pos.x == Catch::Approx(40.0));
  REQUIRE(dets[0].pos.y == Catch::Approx(40.0));

  f.p(23, 10) = 1.0f;  // second bump, 52 px away in x
  acc = fields::accumulate(f, params);
  dets = fields::detect_peaks(acc, 0.5, 5, 10, false);
  REQUIRE(dets.size() == 2);

  AccumulatorMap flat;
  std::fill(flat.h.begin(), flat.h.end(), 0.1);
  REQUIRE(fields::detect_peaks(flat, 0.5, 5, 10).empty());
}

TEST_CASE("detect_peaks: ordering and Chebyshev separation") {
  LocalizationField f;
  f.p(10, 10) = 1.0f;
  f.p(40, 40) = 0.7f;
  f.p(25, 25) = 0.9f;
  FieldParams params;
  auto acc = fields::accumulate(f, params);
  auto dets = fields::detect_peaks(acc, 0.1, 7, 10);
  REQUIRE(dets.size() == 3);
  REQUIRE(dets[0].score >= dets[1].score);
  REQUIRE(dets[1].score >= dets[2].score);
  for (size_t a = 0; a < dets.size(); ++a)
    for (size_t b = a + 1; b < dets.size(); ++b) {
      const double cheb = std::max(std::abs(dets[a].pos.x - dets[b].pos.x),
                                   std::abs(dets[a].pos.y - dets[b].pos.y));
      REQUIRE(cheb >= 7.0);
    }
  // max_count truncation
  REQUIRE(fields::detect_peaks(acc, 0.1, 7, 2).size() == 2);
}

TEST_CASE("associate: single agent ground truth") {
  std::vector<Vec2> prev{{100.0, 100.0}}, curr{{104.0, 102.0}};
  auto af = fields::encode_association(prev, curr, 3);
  std::vector<Detection> cands{{{104.0, 102.0}, 25.0}};
  auto idx = fields::associate(af, prev[0], cands, 0.5);
  REQUIRE(idx.has_value());
  REQUIRE(*idx == 0);
  REQUIRE_FALSE(fields::associate(af, prev[0], {}, 0.5).has_value());
}

TEST_CASE("associate: crossing agents keep identity") {
  // A moves rightward along y=128, B moves downward along x=128; their paths
  // cross in space but never at the same step.
  std::vector<Vec2> prev{{100.0, 128.0}, {128.0, 80.0}};
  std::vector<Vec2> curr{{106.0, 128.0}, {128.0, 86.0}};
  auto af = fields::encode_association(prev, curr, 3);
  std::vector<Detection> cands{{{128.0, 86.0}, 25.0}, {{106.0, 128.0}, 25.0}};
  FieldParams params;
  auto match = fields::match_agents(af, prev, cands, params);
  REQUIRE(match.associated[0]);
  REQUIRE(match.associated[1]);
  REQUIRE(match.positions[0].x == Catch::Approx(106.0));
  REQUIRE(match.positions[0].y == Catch::Approx(128.0));
  REQUIRE(match.positions[1].x == Catch::Approx(128.0));
  REQUIRE(match.positions[1].y == Catch::Approx(86.0));
}

TEST_CASE("decode_trajectories: ground-truth round trip") {
  synthetic::SceneSpec spec;
  spec.n_agents = 5;
  spec.t_total = 13;
  spec.seed = 42;
  auto tracks = synthetic::make_tracks(spec);
  FieldParams params;

  std::vector<LocalizationField> loc;
  std::vector<AssociationField> assoc;
  for (int t = 1; t <= 12; ++t) {
    loc.push_back(fields::encode_localization(synthetic::at_step(tracks, t), params.d0));
    assoc.push_back(fields::encode_association(synthetic::at_step(tracks, t - 1),
                                               synthetic::at_step(tracks, t), params.d0));
  }
  auto decoded = fields::decode_trajectories(loc, assoc, synthetic::at_step(tracks, 0), params);
  REQUIRE(decoded.n_unassociated() == 0);
  for (int t = 0; t < 12; ++t)
    for (size_t a = 0; a < tracks.size(); ++a) {
      const double err = std::sqrt(fields::dist2(decoded.positions[static_cast<size_t>(t)][a],
                                                 tracks[a][static_cast<size_t>(t + 1)]));
      REQUIRE(err < 1.0);
    }
}

TEST_CASE("decode_trajectories: stationary agent and empty input") {
  FieldParams params;
  std::vector<Vec2> seed{{77.3, 141.8}};
  std::vector<LocalizationField> loc;
  std::vector<AssociationField> assoc;
  for (int t = 0; t < 12; ++t) {
    loc.push_back(fields::encode_localization(seed, params.d0));
    assoc.push_back(fields::encode_association(seed, seed, params.d0));
  }
  auto decoded = fields::decode_trajectories(loc, assoc, seed, params);
  for (int t = 0; t < 12; ++t)
    REQUIRE(std::sqrt(fields::dist2(decoded.positions[static_cast<size_t>(t)][0], seed[0])) < 1.0);

  auto empty = fields::decode_trajectories(loc, assoc, {}, params);
  for (const auto& step : empty.positions) REQUIRE(step.empty());
}

TEST_CASE("decode equivariance under horizontal flip") {
  synthetic::SceneSpec spec;
  spec.n_agents = 4;
  spec.t_total = 13;
  spec.seed = 7;
  auto tracks = synthetic::make_tracks(spec);
  auto flipped = tracks;
  for (auto& tr : flipped)
    for (auto& p : tr) p.x = kImageSize - p.x;

  FieldParams params;
  auto decode_scene = [&](const std::vector<std::vector<Vec2>>& trs) {
    std::vector<LocalizationField> loc;
    std::vector<AssociationField> assoc;
    for (int t = 1; t <= 12; ++t) {
      loc.push_back(fields::encode_localization(synthetic::at_step(trs, t), params.d0));
      assoc.push_back(fields::encode_association(synthetic::at_step(trs, t - 1),
                                                 synthetic::at_step(trs, t), params.d0));
    }
    return fields::decode_trajectories(loc, assoc, synthetic::at_step(trs, 0), params);
  };
  auto base = decode_scene(tracks);
  auto flip = decode_scene(flipped);
  for (int t = 0; t < 12; ++t)
    for (size_t a = 0; a < tracks.size(); ++a) {
      const auto& pb = base.positions[static_cast<size_t>(t)][a];
      const auto& pf = flip.positions[static_cast<size_t>(t)][a];
      REQUIRE(std::abs((kImageSize - pb.x) - pf.x) < 1.0);
      REQUIRE(std::abs(pb.y - pf.y) < 1.0);
    }
}

TEST_CASE("field codec round trip property, mixed agent counts") {
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    synthetic::SceneSpec spec;
    spec.n_agents = 1 + static_cast<int>((seed * 7) % 21);
    spec.t_total = 13;
    spec.seed = seed * 1000;
    auto tracks = synthetic::make_tracks(spec);
    FieldParams params;
    std::vector<LocalizationField> loc;
    std::vector<AssociationField> assoc;
    for (int t = 1; t <= 12; ++t) {
      loc.push_back(fields::encode_localization(synthetic::at_step(tracks, t), params.d0));
      assoc.push_back(fields::encode_association(synthetic::at_step(tracks, t - 1),
                                                 synthetic::at_step(tracks, t), params.d0));
    }
    auto decoded = fields::decode_trajectories(loc, assoc, synthetic::at_step(tracks, 0), params);
    REQUIRE(decoded.n_unassociated() == 0);
    for (int t = 0; t < 12; ++t)
      for (size_t a = 0; a < tracks.size(); ++a)
        REQUIRE(std::sqrt(fields::dist2(decoded.positions[static_cast<size_t>(t)][a],
                                        tracks[a][static_cast<size_t>(t + 1)])) < 1.0);
  }
}
