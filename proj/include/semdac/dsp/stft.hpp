#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"
#include "semdac/core/fft.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace semdac {

// periodic Hann, cached per (scalar type, length)
template <typename S>
const std::vector<S>& hann_window(int n) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<S>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<S> w(n);
    for (int i = 0; i < n; ++i)
      w[i] = (S)(0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n)));
    it = cache.emplace(n, std::move(w)).first;
  }
  return it->second;
}

// Mirror index into [0, len) without repeating the edge sample (librosa-style
// reflect). len == 1 maps everything to 0.
inline int reflect_index(int i, int len) {
  if (len == 1) return 0;
  const int period = 2 * (len - 1);
  i = i % period;
  if (i < 0) i += period;
  return i < len ? i : period - i;
}

template <typename S>
struct Spectrogram {
  Mat<S> re, im;  // bins x frames
  int window = 0, hop = 0;

  int bins() const { return (int)re.rows(); }
  int frames() const { return (int)re.cols(); }

  Mat<S> magnitude() const {
    return (re.array().square() + im.array().square()).sqrt().matrix();
  }
};

inline int stft_frames(int length, int hop) { return length / hop + 1; }

// Center-padded STFT: frame t spans samples [t*hop - w/2, t*hop + w/2) of the
// reflect-extended signal; bins = w/2 + 1, frames = floor(len/hop) + 1.
template <typename S>
Spectrogram<S> stft(const S* x, int len, int window, int hop) {
  require(len >= 1, Err::value, "stft input must have at least one sample");
  require(window >= 2 && (window & (window - 1)) == 0, Err::value, "stft window must be a power of two >= 2");
  require(hop >= 1, Err::value, "stft hop must be positive");

  const int bins = window / 2 + 1;
  const int frames = stft_frames(len, hop);
  const auto& win = hann_window<S>(window);
  const auto& fft = Fft<S>::plan(window);

  Spectrogram<S> out;
  out.window = window;
  out.hop = hop;
  out.re.setZero(bins, frames);
  out.im.setZero(bins, frames);

  std::vector<S> re(window), im(window);
  for (int t = 0; t < frames; ++t) {
    const int start = t * hop - window / 2;
    for (int i = 0; i < window; ++i) {
      re[i] = win[i] * (S)x[reflect_index(start + i, len)];
      im[i] = S(0);
    }
    fft.transform(re.data(), im.data(), false);
    for (int b = 0; b < bins; ++b) {
      out.re(b, t) = re[b];
      out.im(b, t) = im[b];
    }
  }
  return out;
}

template <typename S>
Spectrogram<S> stft(const AudioClip& clip, int window, int hop) {
  std::vector<S> x(clip.samples.begin(), clip.samples.end());
  return stft<S>(x.data(), clip.length(), window, hop);
}

// Adjoint of the |STFT| map: given d(loss)/d(magnitude), accumulate
// d(loss)/d(sample). Exact linear-algebra transpose of the forward transform,
// including the window and the reflect padding.
template <typename S>
void stft_magnitude_backward(const Spectrogram<S>& spec, const Mat<S>& dmag, int len, S* dx) {
  const int window = spec.window, hop = spec.hop;
  const int bins = spec.bins(), frames = spec.frames();
  const auto& win = hann_window<S>(window);
  const auto& fft = Fft<S>::plan(window);

  std::vector<S> re(window), im(window);
  for (int t = 0; t < frames; ++t) {
    // d|X| -> dX = g * X / |X|
    for (int b = 0; b < bins; ++b) {
      const S xr = spec.re(b, t), xi = spec.im(b, t);
      const S mag = std::sqrt(xr * xr + xi * xi);
      const S scale = mag > S(0) ? dmag(b, t) / mag : S(0);
      re[b] = xr * scale;
      im[b] = xi * scale;
    }
    for (int b = bins; b < window; ++b) re[b] = im[b] = S(0);
    // dL/dframe[n] = w[n] * Re( sum_b G_b e^{+i 2 pi b n / N} )
    fft.transform(re.data(), im.data(), true);
    const int start = t * hop - window / 2;
    for (int i = 0; i < window; ++i) dx[reflect_index(start + i, len)] += win[i] * re[i];
  }
}

}  // namespace semdac
