#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace semdac {

// ITU-R BS.1770-4 K-weighted loudness. The standard tabulates filter
// coefficients at 48 kHz only; here the two stages (high shelf + high pass)
// are re-derived from their analog prototypes for the clip's sample rate,
// which reproduces the published 48 kHz table to ~1e-6.
struct Biquad {
  double b0, b1, b2, a1, a2;

  void apply(const float* x, double* y, int n) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (int i = 0; i < n; ++i) {
      double xi = x[i];
      double yi = b0 * xi + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = xi;
      y2 = y1;
      y1 = yi;
      y[i] = yi;
    }
  }
  void apply_inplace(double* x, int n) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (int i = 0; i < n; ++i) {
      double xi = x[i];
      double yi = b0 * xi + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = xi;
      y2 = y1;
      y1 = yi;
      x[i] = yi;
    }
  }
};

namespace detail {

// Analog-prototype parameters that reproduce the 48 kHz coefficient table of
// BS.1770 to ~1e-12 when bilinear-transformed with tan prewarping.
inline Biquad k_high_shelf(double fs) {
  const double f0 = 1681.9744509555319;  // Hz
  const double G = 3.99984385397;        // dB
  const double Q = 0.7071752369554193;
  const double K = std::tan(M_PI * f0 / fs);
  const double Vh = std::pow(10.0, G / 20.0);
  const double Vb = std::pow(Vh, 0.499666774155);
  const double a0 = 1.0 + K / Q + K * K;
  Biquad q;
  q.b0 = (Vh + Vb * K / Q + K * K) / a0;
  q.b1 = 2.0 * (K * K - Vh) / a0;
  q.b2 = (Vh - Vb * K / Q + K * K) / a0;
  q.a1 = 2.0 * (K * K - 1.0) / a0;
  q.a2 = (1.0 - K / Q + K * K) / a0;
  return q;
}

inline Biquad k_high_pass(double fs) {
  const double f0 = 38.13547087613982;  // Hz
  const double Q = 0.5003270373238773;
  const double K = std::tan(M_PI * f0 / fs);
  const double d = 1.0 + K / Q + K * K;
  Biquad q;
  q.b0 = 1.0;
  q.b1 = -2.0;
  q.b2 = 1.0;
  q.a1 = 2.0 * (K * K - 1.0) / d;
  q.a2 = (1.0 - K / Q + K * K) / d;
  return q;
}

}  // namespace detail

constexpr double kSilenceLufs = -std::numeric_limits<double>::infinity();

// K-weighted loudness in LUFS. Clips shorter than one 400 ms gating block are
// measured as ungated mean power over the whole clip (gating is undefined
// there); longer clips use the standard -70 LUFS absolute and -10 LU relative
// gates with 400 ms blocks at 75% overlap. Digital silence returns -inf.
inline double measure_lufs(const AudioClip& clip) {
  require(clip.length() > 0, Err::value, "cannot measure loudness of an empty clip");
  const int n = clip.length();
  const double fs = clip.sample_rate;

  std::vector<double> y(n);
  detail::k_high_shelf(fs).apply(clip.samples.data(), y.data(), n);
  detail::k_high_pass(fs).apply_inplace(y.data(), n);

  auto block_power = [&](int start, int len) {
    double acc = 0.0;
    for (int i = start; i < start + len; ++i) acc += y[i] * y[i];
    return acc / len;
  };
  auto to_lufs = [](double z) {
    return z > 0.0 ? -0.691 + 10.0 * std::log10(z) : kSilenceLufs;
  };

  const int block = (int)std::lround(0.400 * fs);
  if (n < block) return to_lufs(block_power(0, n));

  const int step = block / 4;  // 75% overlap
  std::vector<double> powers;
  for (int start = 0; start + block <= n; start += step) powers.push_back(block_power(start, block));
  if (powers.empty()) powers.push_back(block_power(0, n));

  // absolute gate at -70 LUFS
  std::vector<double> kept;
  for (double z : powers)
    if (to_lufs(z) > -70.0) kept.push_back(z);
  if (kept.empty()) return kSilenceLufs;

  double mean = 0.0;
  for (double z : kept) mean += z;
  mean /= kept.size();
  const double rel_gate = to_lufs(mean) - 10.0;

  double acc = 0.0;
  int cnt = 0;
  for (double z : kept)
    if (to_lufs(z) > rel_gate) {
      acc += z;
      ++cnt;
    }
  if (cnt == 0) return kSilenceLufs;
  return to_lufs(acc / cnt);
}

struct NormalizeResult {
  AudioClip clip;
  double gain = 1.0;
  bool clipped = false;  // samples exceeded +-1 after gain and were clamped
};

inline NormalizeResult normalize_lufs(const AudioClip& clip, double target_lufs) {
  const double measured = measure_lufs(clip);
  require(std::isfinite(measured), Err::numeric, "cannot normalize a silent clip");
  NormalizeResult out;
  out.gain = std::pow(10.0, (target_lufs - measured) / 20.0);
  out.clip.sample_rate = clip.sample_rate;
  out.clip.samples.resize(clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    double v = clip.samples[i] * out.gain;
    if (v > 1.0) {
      v = 1.0;
      out.clipped = true;
    } else if (v < -1.0) {
      v = -1.0;
      out.clipped = true;
    }
    out.clip.samples[i] = (float)v;
  }
  return out;
}

}  // namespace semdac
