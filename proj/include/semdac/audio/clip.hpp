#pragma once

#include "semdac/core/common.hpp"
#include "semdac/core/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace semdac {

// Mono waveform in [-1, 1]. The codec paths require 16 kHz; generic DSP ops
// (loudness, STFT) accept any positive rate.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;

  int length() const { return (int)samples.size(); }
  double seconds() const { return double(samples.size()) / sample_rate; }
};

struct ExcerptSpec {
  double duration_s = 0.38;
  double target_lufs = -24.0;

  int sample_count(int sample_rate) const {
    require(duration_s > 0, Err::value, "excerpt duration must be positive");
    return (int)std::floor(duration_s * sample_rate);
  }
};

struct Excerpt {
  AudioClip clip;
  int offset = 0;
  bool padded = false;  // input was shorter than the excerpt and got zero-padded
};

// Contiguous slice of exactly floor(duration*rate) samples at a seeded uniform
// offset. Clips shorter than the excerpt are right-padded with zeros.
inline Excerpt random_excerpt(const AudioClip& clip, const ExcerptSpec& spec, uint64_t rng_seed) {
  const int n = spec.sample_count(clip.sample_rate);
  Excerpt out;
  out.clip.sample_rate = clip.sample_rate;
  if (clip.length() < n) {
    out.clip.samples = clip.samples;
    out.clip.samples.resize(n, 0.0f);
    out.padded = true;
    return out;
  }
  Rng rng(rng_seed);
  const uint64_t span = uint64_t(clip.length() - n) + 1;
  out.offset = (int)rng.below(span);
  out.clip.samples.assign(clip.samples.begin() + out.offset, clip.samples.begin() + out.offset + n);
  return out;
}

struct PaddedClip {
  AudioClip clip;
  int pad_samples = 0;
};

// Right-pad with zeros to the next multiple of hop_total (encoder stride product).
inline PaddedClip pad_to_hop(const AudioClip& clip, int hop_total) {
  require(hop_total > 0, Err::value, "hop_total must be positive");
  PaddedClip out;
  out.clip = clip;
  const int rem = clip.length() % hop_total;
  out.pad_samples = rem == 0 ? 0 : hop_total - rem;
  out.clip.samples.resize(clip.samples.size() + out.pad_samples, 0.0f);
  return out;
}

}  // namespace semdac
