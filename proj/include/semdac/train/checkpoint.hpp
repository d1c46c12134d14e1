#pragma once

#include "semdac/core/common.hpp"
#include "semdac/model/modules.hpp"
#include "semdac/train/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace semdac {

// Self-describing training checkpoint: config snapshot, named float32 blobs
// (parameters + optimizer moments), RNG state. Blobs are sorted by name so a
// save -> load -> save round trip is byte-identical.
struct CheckpointData {
  std::string config_text;
  uint64_t iteration = 0;
  uint64_t gen_opt_step = 0;
  uint64_t disc_opt_step = 0;
  std::array<uint64_t, 4> rng_state{};
  std::map<std::string, Mat<float>> blobs;
};

namespace detail {

inline void w_u32(std::ofstream& f, uint32_t v) {
  uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
  f.write((const char*)b, 4);
}
inline void w_u64(std::ofstream& f, uint64_t v) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
  f.write((const char*)b, 8);
}
inline uint32_t r_u32(std::ifstream& f) {
  uint8_t b[4];
  f.read((char*)b, 4);
  require(f.gcount() == 4, Err::format, "truncated checkpoint");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
inline uint64_t r_u64(std::ifstream& f) {
  uint8_t b[8];
  f.read((char*)b, 8);
  require(f.gcount() == 8, Err::format, "truncated checkpoint");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const CheckpointData& ck) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Err::io, "cannot open checkpoint for writing: " + path);
  f.write("SDCK", 4);
  const uint8_t version = 1;
  f.write((const char*)&version, 1);
  detail::w_u32(f, (uint32_t)ck.config_text.size());
  f.write(ck.config_text.data(), (std::streamsize)ck.config_text.size());
  detail::w_u64(f, ck.iteration);
  detail::w_u64(f, ck.gen_opt_step);
  detail::w_u64(f, ck.disc_opt_step);
  for (uint64_t w : ck.rng_state) detail::w_u64(f, w);
  detail::w_u32(f, (uint32_t)ck.blobs.size());
  for (const auto& [name, m] : ck.blobs) {  // std::map iterates sorted
    require(name.size() <= 0xffff, Err::value, "blob name too long");
    uint8_t nl[2] = {uint8_t(name.size()), uint8_t(name.size() >> 8)};
    f.write((const char*)nl, 2);
    f.write(name.data(), (std::streamsize)name.size());
    detail::w_u32(f, (uint32_t)m.rows());
    detail::w_u32(f, (uint32_t)m.cols());
    static_assert(sizeof(float) == 4);
    f.write((const char*)m.data(), (std::streamsize)(m.size() * 4));
  }
  require(f.good(), Err::io, "checkpoint write failed: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), Err::io, "cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  require(f.gcount() == 4 && std::memcmp(magic, "SDCK", 4) == 0, Err::format,
          "bad checkpoint magic: " + path);
  uint8_t version = 0;
  f.read((char*)&version, 1);
  require(version == 1, Err::format, "unsupported checkpoint version");
  CheckpointData ck;
  const uint32_t cfg_len = detail::r_u32(f);
  ck.config_text.resize(cfg_len);
  f.read(ck.config_text.data(), cfg_len);
  require(f.gcount() == (std::streamsize)cfg_len, Err::format, "truncated checkpoint config");
  ck.iteration = detail::r_u64(f);
  ck.gen_opt_step = detail::r_u64(f);
  ck.disc_opt_step = detail::r_u64(f);
  for (auto& w : ck.rng_state) w = detail::r_u64(f);
  const uint32_t n_blobs = detail::r_u32(f);
  for (uint32_t i = 0; i < n_blobs; ++i) {
    uint8_t nl[2];
    f.read((char*)nl, 2);
    require(f.gcount() == 2, Err::format, "truncated checkpoint blob header");
    const size_t name_len = size_t(nl[0]) | size_t(nl[1]) << 8;
    std::string name(name_len, '\0');
    f.read(name.data(), (std::streamsize)name_len);
    require(f.gcount() == (std::streamsize)name_len, Err::format, "truncated blob name");
    const uint32_t rows = detail::r_u32(f), cols = detail::r_u32(f);
    Mat<float> m(rows, cols);
    f.read((char*)m.data(), (std::streamsize)(size_t(rows) * cols * 4));
    require(f.gcount() == (std::streamsize)(size_t(rows) * cols * 4), Err::format,
            "truncated blob data: " + name);
    require(ck.blobs.emplace(std::move(name), std::move(m)).second, Err::format,
            "duplicate blob in checkpoint");
  }
  return ck;
}

// ---- store <-> blob mapping ----

inline void store_to_blobs(const ParamStore<float>& store, const std::string& prefix,
                           std::map<std::string, Mat<float>>& blobs) {
  for (const auto* p : store.items) blobs[prefix + p->name] = p->value;
}

inline void blobs_to_store(const CheckpointData& ck, const std::string& prefix,
                           ParamStore<float>& store) {
  for (auto* p : store.items) {
    auto it = ck.blobs.find(prefix + p->name);
    require(it != ck.blobs.end(), Err::format, "checkpoint missing parameter: " + p->name);
    require(it->second.rows() == p->value.rows() && it->second.cols() == p->value.cols(),
            Err::format, "checkpoint shape mismatch for: " + p->name);
    p->value = it->second;
  }
}

inline void adam_to_blobs(const AdamW<float>& opt, const ParamStore<float>& store,
                          const std::string& prefix, std::map<std::string, Mat<float>>& blobs) {
  for (size_t i = 0; i < store.items.size(); ++i) {
    blobs[prefix + "m." + store.items[i]->name] = opt.moments1()[i];
    blobs[prefix + "v." + store.items[i]->name] = opt.moments2()[i];
  }
}

inline void blobs_to_adam(const CheckpointData& ck, const ParamStore<float>& store,
                          const std::string& prefix, AdamW<float>& opt) {
  for (size_t i = 0; i < store.items.size(); ++i) {
    auto m = ck.blobs.find(prefix + "m." + store.items[i]->name);
    auto v = ck.blobs.find(prefix + "v." + store.items[i]->name);
    require(m != ck.blobs.end() && v != ck.blobs.end(), Err::format,
            "checkpoint missing optimizer state for: " + store.items[i]->name);
    opt.moments1()[i] = m->second;
    opt.moments2()[i] = v->second;
  }
}

}  // namespace semdac
