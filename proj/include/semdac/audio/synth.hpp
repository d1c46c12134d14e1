#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/audio/loudness.hpp"
#include "semdac/core/rng.hpp"

#include <cmath>
#include <vector>

namespace semdac {

// Deterministic speech-like test tone: a handful of harmonics under a
// formant-ish envelope with slow f0 vibrato, a noise floor, and an attack /
// release ramp. Good enough to exercise every codec path; not speech.
inline AudioClip synth_voice_clip(uint64_t seed, double seconds, int sample_rate) {
  Rng rng(seed);
  const int n = (int)std::floor(seconds * sample_rate);
  const double f0 = 90.0 + rng.next_double() * 160.0;
  const double vibrato_hz = 3.0 + rng.next_double() * 4.0;
  const double vibrato_depth = 0.01 + rng.next_double() * 0.02;
  const double formant1 = 350.0 + rng.next_double() * 500.0;
  const double formant2 = 1100.0 + rng.next_double() * 1400.0;
  const double noise_level = 0.01 + rng.next_double() * 0.03;
  const int harmonics = 24;

  std::vector<double> amp(harmonics);
  for (int h = 0; h < harmonics; ++h) {
    const double f = f0 * (h + 1);
    const double d1 = (f - formant1) / 220.0;
    const double d2 = (f - formant2) / 420.0;
    amp[h] = std::exp(-0.5 * d1 * d1) + 0.6 * std::exp(-0.5 * d2 * d2) + 0.02;
    amp[h] /= (h + 1);
  }
  std::vector<double> phase(harmonics);
  for (int h = 0; h < harmonics; ++h) phase[h] = rng.next_double() * 2.0 * M_PI;

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  double inst_phase = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / sample_rate;
    const double f_now = f0 * (1.0 + vibrato_depth * std::sin(2.0 * M_PI * vibrato_hz * t));
    inst_phase += 2.0 * M_PI * f_now / sample_rate;
    double v = 0.0;
    for (int h = 0; h < harmonics; ++h) v += amp[h] * std::sin((h + 1) * inst_phase + phase[h]);
    v += noise_level * rng.normal();
    const double attack = std::min(1.0, t / 0.02);
    const double release = std::min(1.0, (seconds - t) / 0.02);
    clip.samples[i] = (float)(v * 0.2 * attack * release);
  }
  return normalize_lufs(clip, -24.0).clip;
}

}  // namespace semdac
