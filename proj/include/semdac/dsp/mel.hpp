#pragma once

#include "semdac/core/common.hpp"
#include "semdac/dsp/stft.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace semdac {

// HTK mel scale
inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

struct MelConfig {
  int window_length = 512;
  int hop_length = 128;  // window / 4
  int n_mels = 80;
  int sample_rate = 16000;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;

  static MelConfig make(int window, int n_mels, int sample_rate) {
    MelConfig c;
    c.window_length = window;
    c.hop_length = window / 4;
    c.n_mels = n_mels;
    c.sample_rate = sample_rate;
    c.fmin = 0.0;
    c.fmax = sample_rate / 2.0;
    return c;
  }

  void validate() const {
    require(hop_length * 4 == window_length, Err::value, "mel hop must be window/4");
    require(n_mels >= 1 && n_mels <= window_length / 2 + 1, Err::value,
            "n_mels must be in [1, window/2 + 1]");
    require(sample_rate > 0 && fmax <= sample_rate / 2.0 + 1e-9 && fmin >= 0.0 && fmin < fmax,
            Err::value, "bad mel band edges");
  }
};

// The seven (window, mel-bin) pairs of the reconstruction loss.
struct MelScaleSet {
  std::vector<MelConfig> configs;

  static MelScaleSet standard(int sample_rate) {
    static constexpr std::array<int, 7> windows{32, 64, 128, 256, 512, 1024, 2048};
    static constexpr std::array<int, 7> mels{5, 10, 20, 40, 80, 160, 320};
    MelScaleSet s;
    for (size_t i = 0; i < windows.size(); ++i)
      s.configs.push_back(MelConfig::make(windows[i], mels[i], sample_rate));
    return s;
  }
};

// Triangular filters, unit peak, n_mels x (window/2 + 1).
template <typename S>
Mat<S> mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const int bins = cfg.window_length / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

  Mat<S> fb = Mat<S>::Zero(cfg.n_mels, bins);
  const double bin_hz = double(cfg.sample_rate) / cfg.window_length;
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double f0 = edges[m], f1 = edges[m + 1], f2 = edges[m + 2];
    for (int b = 0; b < bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > f0 && f < f2) {
        w = f <= f1 ? (f - f0) / (f1 - f0) : (f2 - f) / (f2 - f1);
      }
      if (w > 0.0) fb(m, b) = (S)w;
    }
  }
  return fb;
}

// log(max(filterbank * |stft|, floor)), natural log. n_mels x frames.
template <typename S>
Mat<S> log_mel(const AudioClip& clip, const MelConfig& cfg) {
  cfg.validate();
  auto spec = stft<S>(clip, cfg.window_length, cfg.hop_length);
  Mat<S> m = mel_filterbank<S>(cfg) * spec.magnitude();
  return m.array().max((S)cfg.log_floor).log().matrix();
}

}  // namespace semdac
