#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "odigen/tensor.hpp"

namespace odigen::train {

// Little-endian binary container: magic "ODIG", u32 version, config text
// block, u64 iteration counter, u32 tensor count, then per tensor
// (u32 name length, name, u32 rank, dims, raw f32 values).
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'O', 'D', 'I', 'G'};

struct Checkpoint {
  std::string config_text;
  uint64_t iteration = 0;
  std::vector<std::pair<std::string, Tensor4<float>>> tensors;

  const Tensor4<float>* find(const std::string& name) const {
    for (auto& [n, t] : tensors)
      if (n == name) return &t;
    return nullptr;
  }
};

class CheckpointFormatError : public std::runtime_error {
 public:
  CheckpointFormatError(const std::string& msg, std::streamoff offset)
      : std::runtime_error(msg + " (at byte offset " + std::to_string(offset) + ")") {}
};

class CheckpointVersionError : public std::runtime_error {
 public:
  explicit CheckpointVersionError(uint32_t found)
      : std::runtime_error("checkpoint version mismatch: found " + std::to_string(found) +
                           ", expected " + std::to_string(kCheckpointVersion)) {}
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v{};
  std::streamoff off = is.tellg();
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointFormatError(std::string("truncated reading ") + what, off);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 4);
  detail::put<uint32_t>(os, kCheckpointVersion);
  detail::put<uint32_t>(os, static_cast<uint32_t>(ckpt.config_text.size()));
  os.write(ckpt.config_text.data(), static_cast<std::streamsize>(ckpt.config_text.size()));
  detail::put<uint64_t>(os, ckpt.iteration);
  detail::put<uint32_t>(os, static_cast<uint32_t>(ckpt.tensors.size()));
  for (auto& [name, t] : ckpt.tensors) {
    detail::put<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put<uint32_t>(os, 4);
    detail::put<uint32_t>(os, static_cast<uint32_t>(t.n));
    detail::put<uint32_t>(os, static_cast<uint32_t>(t.c));
    detail::put<uint32_t>(os, static_cast<uint32_t>(t.h));
    detail::put<uint32_t>(os, static_cast<uint32_t>(t.w));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw CheckpointFormatError("bad magic", 0);
  uint32_t version = detail::get<uint32_t>(is, "version");
  if (version != kCheckpointVersion) throw CheckpointVersionError(version);

  Checkpoint ckpt;
  uint32_t cfg_len = detail::get<uint32_t>(is, "config length");
  ckpt.config_text.resize(cfg_len);
  std::streamoff off = is.tellg();
  is.read(ckpt.config_text.data(), cfg_len);
  if (!is) throw CheckpointFormatError("truncated config block", off);
  ckpt.iteration = detail::get<uint64_t>(is, "iteration");
  uint32_t count = detail::get<uint32_t>(is, "tensor count");
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = detail::get<uint32_t>(is, "tensor name length");
    std::string name(name_len, '\0');
    off = is.tellg();
    is.read(name.data(), name_len);
    if (!is) throw CheckpointFormatError("truncated tensor name", off);
    uint32_t rank = detail::get<uint32_t>(is, "tensor rank");
    if (rank != 4) throw CheckpointFormatError("unexpected tensor rank", is.tellg());
    int n = static_cast<int>(detail::get<uint32_t>(is, "dim n"));
    int c = static_cast<int>(detail::get<uint32_t>(is, "dim c"));
    int h = static_cast<int>(detail::get<uint32_t>(is, "dim h"));
    int w = static_cast<int>(detail::get<uint32_t>(is, "dim w"));
    Tensor4<float> t(n, c, h, w);
    off = is.tellg();
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is) throw CheckpointFormatError("truncated tensor data for " + name, off);
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

}  // namespace odigen::train
