#pragma once

#include "semdac/core/common.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace semdac {

// Iterative radix-2 complex FFT with cached bit-reversal and per-stage twiddle
// tables. All STFT window sizes used here (32..2048) are powers of two.
template <typename S>
class Fft {
 public:
  explicit Fft(int n) : n_(n) {
    require(n >= 1 && (n & (n - 1)) == 0, Err::value, "fft size must be a power of two");
    rev_.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
      unsigned r = 0;
      for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      rev_[i] = (int)r;
    }
    // one table of n/2 roots of unity covers every butterfly stage
    root_re_.resize(n / 2 > 0 ? n / 2 : 1);
    root_im_.resize(root_re_.size());
    for (size_t j = 0; j < root_re_.size(); ++j) {
      double ang = -2.0 * M_PI * double(j) / double(n);
      root_re_[j] = (S)std::cos(ang);
      root_im_[j] = (S)std::sin(ang);
    }
  }

  int size() const { return n_; }

  // in-place, forward when inverse=false (factor exp(-2pi i k n / N)),
  // inverse applies exp(+...) without the 1/N normalization.
  void transform(S* re, S* im, bool inverse) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
      int j = rev_[i];
      if (j > i) {
        std::swap(re[i], re[j]);
        std::swap(im[i], im[j]);
      }
    }
    for (int len = 2; len <= n; len <<= 1) {
      const int half = len >> 1;
      const int step = n / len;  // stride into the n/2-point root table
      for (int i = 0; i < n; i += len) {
        int tw = 0;
        for (int j = 0; j < half; ++j, tw += step) {
          S wr = root_re_[tw];
          S wi = inverse ? -root_im_[tw] : root_im_[tw];
          S ur = re[i + j], ui = im[i + j];
          S vr = re[i + j + half] * wr - im[i + j + half] * wi;
          S vi = re[i + j + half] * wi + im[i + j + half] * wr;
          re[i + j] = ur + vr;
          im[i + j] = ui + vi;
          re[i + j + half] = ur - vr;
          im[i + j + half] = ui - vi;
        }
      }
    }
  }

  // process-wide cache; transforms are reused across frames/scales/clips
  static const Fft& plan(int n) {
    static std::mutex mu;
    static std::unordered_map<int, std::unique_ptr<Fft>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Fft>(n)).first;
    return *it->second;
  }

 private:
  int n_;
  std::vector<int> rev_;
  std::vector<S> root_re_, root_im_;
};

}  // namespace semdac
