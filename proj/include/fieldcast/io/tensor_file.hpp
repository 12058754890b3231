#pragma once

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fieldcast/core/error.hpp"
#include "fieldcast/core/tensor.hpp"

namespace fieldcast::io {

using json = nlohmann::json;

// Flat binary container: magic, one JSON header describing the named tensors
// (shape, dtype, channel names and other metadata), then the raw
// little-endian payload. Shared by field dumps, caches and checkpoints.
class TensorFile {
 public:
  static constexpr char kMagic[4] = {'F', 'C', 'T', 'C'};
  static constexpr uint32_t kVersion = 1;

  json meta = json::object();

  template <class T>
  void add(const std::string& name, const nn::Tensor<T>& t) {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    Entry e;
    e.name = name;
    e.dtype = std::is_same_v<T, float> ? "f32" : "f64";
    for (int64_t s : t.shape()) e.shape.push_back(s);
    e.raw.resize(static_cast<size_t>(t.numel()) * sizeof(T));
    std::memcpy(e.raw.data(), t.data(), e.raw.size());
    entries_.push_back(std::move(e));
  }

  bool has(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return true;
    return false;
  }

  template <class T>
  nn::Tensor<T> get(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.name != name) continue;
      const std::string want = std::is_same_v<T, float> ? "f32" : "f64";
      require(e.dtype == want, "TensorFile: dtype mismatch for " + name);
      nn::Tensor<T> t(e.shape);
      require(e.raw.size() == static_cast<size_t>(t.numel()) * sizeof(T),
              "TensorFile: payload size mismatch for " + name);
      std::memcpy(t.data(), e.raw.data(), e.raw.size());
      return t;
    }
    throw DataError("TensorFile: no tensor named " + name);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

  void save(const std::string& path) const {
    json header;
    header["meta"] = meta;
    header["tensors"] = json::array();
    uint64_t offset = 0;
    for (const auto& e : entries_) {
      header["tensors"].push_back({{"name", e.name},
                                   {"dtype", e.dtype},
                                   {"shape", e.shape},
                                   {"offset", offset},
                                   {"bytes", e.raw.size()}});
      offset += e.raw.size();
    }
    const std::string hs = header.dump();

    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw DataError("cannot write " + path);
      out.write(kMagic, 4);
      const uint32_t version = kVersion;
      out.write(reinterpret_cast<const char*>(&version), sizeof(version));
      const uint64_t hlen = hs.size();
      out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
      out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
      for (const auto& e : entries_)
        out.write(e.raw.data(), static_cast<std::streamsize>(e.raw.size()));
      if (!out) throw DataError("short write: " + path);
    }
    std::filesystem::rename(tmp, path);
  }

  static TensorFile load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[4];
    uint32_t version = 0;
    uint64_t hlen = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
      throw DataError("not a tensor container: " + path);
    require(version == kVersion, "TensorFile: unsupported version");
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    json header = json::parse(hs, nullptr, false);
    if (header.is_discarded()) throw DataError("corrupt header: " + path);

    TensorFile tf;
    tf.meta = header.value("meta", json::object());
    for (const auto& je : header.at("tensors")) {
      Entry e;
      e.name = je.at("name").get<std::string>();
      e.dtype = je.at("dtype").get<std::string>();
      e.shape = je.at("shape").get<std::vector<int64_t>>();
      e.raw.resize(je.at("bytes").get<size_t>());
      in.read(e.raw.data(), static_cast<std::streamsize>(e.raw.size()));
      if (!in) throw DataError("truncated payload: " + path);
      tf.entries_.push_back(std::move(e));
    }
    return tf;
  }

 private:
  struct Entry {
    std::string name;
    std::string dtype;
    std::vector<int64_t> shape;
    std::vector<char> raw;
  };
  std::vector<Entry> entries_;
};

}  // namespace fieldcast::io
