#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fieldcast/core/random.hpp"
#include "fieldcast/io/tensor_file.hpp"
#include "fieldcast/model/network.hpp"

namespace fieldcast::model {

inline std::string arch_string(const ModelConfig& c, int64_t t_obs) {
  std::ostringstream os;
  os << "variant=" << variant_name(c.variant) << ";enc=" << c.enc_c1 << "," << c.enc_c2
     << ";lstm=" << c.lstm_hidden << ",k" << c.lstm_kernel << ";gn=" << c.gn_groups
     << ";nl=" << c.nl_inter << ",p" << c.nl_pool << ",d" << (c.nl_distinct_phi ? 1 : 0)
     << ";c3d=" << c.conv3d_channels << ";fuse=" << c.fuse_channels << ";sem=" << c.sem_c1 << ","
     << c.sem_c << ";dec=" << c.dec_hidden << ";tobs=" << t_obs << ";rad=" << c.binary_map_radius
     << ";seedpool=" << c.seed_pool;
  return os.str();
}

inline uint64_t arch_hash(const ModelConfig& c, int64_t t_obs) {
  return fnv1a(arch_string(c, t_obs));
}

template <class T>
void save_checkpoint(const std::string& path, TrajectoryForecaster<T>& net, int64_t epoch,
                     const io::json& config_snapshot,
                     const std::vector<std::pair<std::string, nn::Tensor<T>>>& extra = {},
                     const io::json& extra_meta = io::json::object()) {
  io::TensorFile tf;
  tf.meta["format"] = "fieldcast-checkpoint";
  tf.meta["arch"] = arch_string(net.cfg, net.t_obs);
  tf.meta["arch_hash"] = arch_hash(net.cfg, net.t_obs);
  tf.meta["epoch"] = epoch;
  tf.meta["config"] = config_snapshot;
  for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) tf.meta[it.key()] = it.value();
  for (const auto& p : net.params()) tf.add("param." + p.name, p.var->value());
  for (const auto& [name, tensor] : extra) tf.add(name, tensor);
  tf.save(path);
}

struct CheckpointInfo {
  int64_t epoch = 0;
  io::json config;
  io::TensorFile file;
};

// Restores every parameter tensor in place; the architecture fingerprint must
// match the instantiated network.
template <class T>
CheckpointInfo load_checkpoint(const std::string& path, TrajectoryForecaster<T>& net) {
  CheckpointInfo info;
  info.file = io::TensorFile::load(path);
  require(info.file.meta.value("format", "") == "fieldcast-checkpoint",
          "not a checkpoint file: " + path);
  const uint64_t want = arch_hash(net.cfg, net.t_obs);
  const uint64_t got = info.file.meta.value("arch_hash", uint64_t{0});
  if (want != got)
    throw ConfigError("checkpoint architecture mismatch: file has '" +
                      info.file.meta.value("arch", std::string("?")) + "', config builds '" +
                      arch_string(net.cfg, net.t_obs) + "'");
  for (auto& p : net.params()) {
    nn::Tensor<T> t = info.file.template get<T>("param." + p.name);
    require(t.shape() == p.var->value().shape(), "checkpoint shape mismatch for " + p.name);
    p.var->value() = std::move(t);
  }
  info.epoch = info.file.meta.value("epoch", int64_t{0});
  info.config = info.file.meta.value("config", io::json::object());
  return info;
}

}  // namespace fieldcast::model
