#pragma once

#include "semdac/core/common.hpp"
#include "semdac/core/rng.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace semdac {

// Frame-aligned semantic teacher features (50 Hz). Produced offline by an
// external feature extractor and imported through the SEMF file format;
// never computed in-process.
struct TeacherFeatures {
  Mat<float> values;  // teacher_dim x n_frames
  int frame_rate = 50;

  int teacher_dim() const { return (int)values.rows(); }
  int n_frames() const { return (int)values.cols(); }
};

// SEMF: magic "SEMF", version u8=1, teacher_dim u32, n_frames u32, then
// n_frames x teacher_dim float32, frame-major, little-endian.
inline void save_teacher_features(const std::string& path, const TeacherFeatures& f) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Err::io, "cannot open for writing: " + path);
  out.write("SEMF", 4);
  const uint8_t version = 1;
  out.write((const char*)&version, 1);
  auto w_u32 = [&](uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    out.write((const char*)b, 4);
  };
  w_u32((uint32_t)f.teacher_dim());
  w_u32((uint32_t)f.n_frames());
  for (int t = 0; t < f.n_frames(); ++t)
    for (int d = 0; d < f.teacher_dim(); ++d) {
      float v = f.values(d, t);
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      uint8_t b[4] = {uint8_t(bits), uint8_t(bits >> 8), uint8_t(bits >> 16), uint8_t(bits >> 24)};
      out.write((const char*)b, 4);
    }
  require(out.good(), Err::io, "write failed: " + path);
}

struct SemfInfo {
  int teacher_dim = 0;
  int n_frames = 0;
};

inline SemfInfo semf_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Err::io, "cannot open teacher file: " + path);
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::memcmp(magic, "SEMF", 4) == 0, Err::format,
          "bad SEMF magic: " + path);
  uint8_t version = 0;
  in.read((char*)&version, 1);
  require(version == 1, Err::format, "unsupported SEMF version");
  uint8_t b[8];
  in.read((char*)b, 8);
  require(in.gcount() == 8, Err::format, "truncated SEMF header: " + path);
  SemfInfo info;
  info.teacher_dim = int(uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
                         uint32_t(b[3]) << 24);
  info.n_frames = int(uint32_t(b[4]) | uint32_t(b[5]) << 8 | uint32_t(b[6]) << 16 |
                      uint32_t(b[7]) << 24);
  return info;
}

// Reads frames [start_frame, start_frame + n_frames) from a SEMF file.
inline TeacherFeatures load_teacher_features(const std::string& path, int start_frame,
                                             int n_frames) {
  const SemfInfo info = semf_info(path);
  require(start_frame >= 0 && n_frames >= 0 && start_frame + n_frames <= info.n_frames,
          Err::range, "teacher frame window out of bounds: " + path);
  std::ifstream in(path, std::ios::binary);
  in.seekg(9 + (std::streamoff)start_frame * info.teacher_dim * 4);
  TeacherFeatures f;
  f.values.resize(info.teacher_dim, n_frames);
  std::vector<uint8_t> buf((size_t)info.teacher_dim * 4);
  for (int t = 0; t < n_frames; ++t) {
    in.read((char*)buf.data(), (std::streamsize)buf.size());
    require(in.gcount() == (std::streamsize)buf.size(), Err::format,
            "truncated SEMF payload: " + path);
    for (int d = 0; d < info.teacher_dim; ++d) {
      uint32_t bits = uint32_t(buf[d * 4]) | uint32_t(buf[d * 4 + 1]) << 8 |
                      uint32_t(buf[d * 4 + 2]) << 16 | uint32_t(buf[d * 4 + 3]) << 24;
      float v;
      std::memcpy(&v, &bits, 4);
      f.values(d, t) = v;
    }
  }
  return f;
}

// Deterministic stand-in teacher: frame t of a clip is a pure function of
// (clip_hash, absolute frame index). Used when no SEMF files are available.
inline TeacherFeatures mock_teacher_window(uint64_t clip_hash, int start_frame, int n_frames,
                                           int teacher_dim) {
  require(n_frames >= 0 && teacher_dim >= 1, Err::value, "bad mock teacher shape");
  TeacherFeatures f;
  f.values.resize(teacher_dim, n_frames);
  for (int t = 0; t < n_frames; ++t) {
    uint64_t seed = clip_hash ^ (uint64_t(uint32_t(start_frame + t)) * 0x9e3779b97f4a7c15ull);
    Rng rng(splitmix64(seed));
    for (int d = 0; d < teacher_dim; ++d) f.values(d, t) = (float)rng.normal();
  }
  return f;
}

inline TeacherFeatures mock_teacher(uint64_t clip_hash, int n_frames, int teacher_dim) {
  return mock_teacher_window(clip_hash, 0, n_frames, teacher_dim);
}

// Nearest-frame resampling to the codec frame count; tolerates at most a
// +-2 frame mismatch (edge-padding differences), anything larger signals a
// wrong teacher file.
inline TeacherFeatures align_frames(const TeacherFeatures& f, int n_codec_frames) {
  require(n_codec_frames >= 0, Err::value, "negative frame count");
  const int n_src = f.n_frames();
  if (n_src == n_codec_frames) return f;
  require(std::abs(n_src - n_codec_frames) <= 2, Err::align,
          "teacher/codec frame mismatch beyond tolerance");
  require(n_src >= 1, Err::align, "cannot align an empty teacher sequence");
  TeacherFeatures out;
  out.frame_rate = f.frame_rate;
  out.values.resize(f.teacher_dim(), n_codec_frames);
  for (int t = 0; t < n_codec_frames; ++t) {
    int src = (int)std::floor((t + 0.5) * double(n_src) / double(n_codec_frames));
    if (src > n_src - 1) src = n_src - 1;
    out.values.col(t) = f.values.col(src);
  }
  return out;
}

}  // namespace semdac
