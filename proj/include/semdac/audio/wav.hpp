#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace semdac {

namespace detail {

inline uint32_t rd_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
inline uint16_t rd_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

}  // namespace detail

// PCM WAV reader: 16-bit integer or 32-bit float, any channel count
// (averaged to mono). Walks RIFF chunks; tolerates extra chunks before data.
inline AudioClip load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), Err::io, "cannot open wav file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 12, Err::format, "wav too short for RIFF header: " + path);
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0 && std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          Err::format, "not a RIFF/WAVE file: " + path);

  uint16_t fmt_tag = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    uint32_t chunk_len = detail::rd_u32(hdr + 4);
    size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      // truncated final chunk: accept a short data chunk, reject otherwise
      require(std::memcmp(hdr, "data", 4) == 0, Err::format, "truncated chunk in wav: " + path);
      chunk_len = uint32_t(bytes.size() - body);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      require(chunk_len >= 16, Err::format, "fmt chunk too short: " + path);
      const uint8_t* p = bytes.data() + body;
      fmt_tag = detail::rd_u16(p);
      channels = detail::rd_u16(p + 2);
      rate = detail::rd_u32(p + 4);
      bits = detail::rd_u16(p + 14);
      if (fmt_tag == 0xFFFE && chunk_len >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: first two bytes of the SubFormat GUID
        fmt_tag = detail::rd_u16(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
      break;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  require(have_fmt, Err::format, "wav has no fmt chunk: " + path);
  require(data != nullptr, Err::format, "wav has no data chunk: " + path);
  require(channels >= 1, Err::format, "wav has zero channels: " + path);
  require(rate >= 1, Err::format, "wav has zero sample rate: " + path);

  const bool pcm16 = fmt_tag == 1 && bits == 16;
  const bool f32 = fmt_tag == 3 && bits == 32;
  require(pcm16 || f32, Err::unsupported,
          "unsupported wav encoding (need 16-bit PCM or 32-bit float): " + path);

  const int bytes_per = bits / 8;
  const uint32_t frame_bytes = uint32_t(bytes_per) * channels;
  const uint32_t n_frames = frame_bytes ? data_len / frame_bytes : 0;

  AudioClip clip;
  clip.sample_rate = (int)rate;
  clip.samples.resize(n_frames);
  const double inv_ch = 1.0 / channels;
  for (uint32_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    const uint8_t* fr = data + size_t(i) * frame_bytes;
    for (uint16_t c = 0; c < channels; ++c) {
      const uint8_t* sp = fr + size_t(c) * bytes_per;
      if (pcm16) {
        int16_t v;
        std::memcpy(&v, sp, 2);
        acc += double(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, sp, 4);
        acc += double(v);
      }
    }
    clip.samples[i] = float(acc * inv_ch);
  }
  return clip;
}

// 16-bit PCM mono writer.
inline void save_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Err::io, "cannot open wav for writing: " + path);
  auto w_u32 = [&](uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    f.write((const char*)b, 4);
  };
  auto w_u16 = [&](uint16_t v) {
    uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
    f.write((const char*)b, 2);
  };
  const uint32_t n = (uint32_t)clip.samples.size();
  const uint32_t data_len = n * 2;
  f.write("RIFF", 4);
  w_u32(36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  w_u32(16);
  w_u16(1);  // PCM
  w_u16(1);  // mono
  w_u32((uint32_t)clip.sample_rate);
  w_u32((uint32_t)clip.sample_rate * 2);
  w_u16(2);
  w_u16(16);
  f.write("data", 4);
  w_u32(data_len);
  for (float s : clip.samples) {
    float x = std::clamp(s, -1.0f, 1.0f);
    int16_t v = (int16_t)std::lrintf(x * 32767.0f);
    uint8_t b[2] = {uint8_t(uint16_t(v)), uint8_t(uint16_t(v) >> 8)};
    f.write((const char*)b, 2);
  }
  require(f.good(), Err::io, "wav write failed: " + path);
}

}  // namespace semdac
