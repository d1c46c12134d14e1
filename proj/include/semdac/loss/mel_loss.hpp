#pragma once

#include "semdac/core/graph.hpp"
#include "semdac/dsp/mel.hpp"
#include "semdac/dsp/stft.hpp"
#include "semdac/loss/losses.hpp"

#include <memory>
#include <vector>

namespace semdac {

// Multi-scale mel loss as a graph node: forward reuses the plain spectral
// kernels, backward runs the exact adjoint chain
// L1 -> log -> floor -> filterbank^T -> |X| -> iFFT -> window/overlap-add.
// The reference mels and filterbanks are precomputed once per excerpt.
template <typename S>
struct MelLossContext {
  MelScaleSet scales;
  std::vector<Mat<S>> filterbanks;
  std::vector<Mat<S>> ref_logmels;
  int length = 0;

  MelLossContext() = default;

  MelLossContext(const AudioClip& ref, const MelScaleSet& set) : scales(set), length(ref.length()) {
    for (const auto& cfg : scales.configs) {
      filterbanks.push_back(mel_filterbank<S>(cfg));
      ref_logmels.push_back(log_mel<S>(ref, cfg));
    }
  }
};

namespace ops {

template <typename S>
Var<S> multiscale_mel_loss_node(Var<S> wav, const std::shared_ptr<MelLossContext<S>>& ctx) {
  Graph<S>& g = *wav.g;
  require(wav.rows() == 1 && wav.cols() == ctx->length, Err::value,
          "mel loss length mismatch");
  const int xi = wav.i;
  const int len = ctx->length;

  struct Saved {
    std::vector<Spectrogram<S>> specs;
    std::vector<Mat<S>> mags;
    std::vector<Mat<S>> mels;  // pre-log, post-floor handled via mask on use
  };
  auto saved = std::make_shared<Saved>();

  // forward: contiguous sample view of the graph value, full S precision
  std::vector<S> x(len);
  for (int i = 0; i < len; ++i) x[i] = g.val(xi)(0, i);

  S total = S(0);
  for (size_t sc = 0; sc < ctx->scales.configs.size(); ++sc) {
    const auto& cfg = ctx->scales.configs[sc];
    auto spec = stft<S>(x.data(), len, cfg.window_length, cfg.hop_length);
    Mat<S> mag = spec.magnitude();
    Mat<S> mel = ctx->filterbanks[sc] * mag;
    Mat<S> logm = mel.array().max((S)cfg.log_floor).log().matrix();
    total += (logm - ctx->ref_logmels[sc]).array().abs().mean();
    saved->specs.push_back(std::move(spec));
    saved->mags.push_back(std::move(mag));
    saved->mels.push_back(std::move(mel));
  }

  Mat<S> v(1, 1);
  v(0, 0) = total;
  int out = g.add(std::move(v), g.wants(xi), [xi, ctx, saved, len](Graph<S>& g, const Mat<S>& gy) {
    if (!g.wants(xi)) return;
    const S gscale = gy(0, 0);
    Mat<S>& gx = g.grad_ref(xi);
    std::vector<S> dx(len, S(0));
    for (size_t sc = 0; sc < ctx->scales.configs.size(); ++sc) {
      const auto& cfg = ctx->scales.configs[sc];
      const Mat<S>& mel = saved->mels[sc];
      const Mat<S>& ref = ctx->ref_logmels[sc];
      const S floor = (S)cfg.log_floor;
      const S inv_n = S(1) / S(mel.size());
      // d/dmel of mean|log(max(mel,floor)) - ref|
      Mat<S> dmel(mel.rows(), mel.cols());
      for (int r = 0; r < mel.rows(); ++r)
        for (int c = 0; c < mel.cols(); ++c) {
          const S m = mel(r, c);
          if (m <= floor) {
            dmel(r, c) = S(0);
            continue;
          }
          const S diff = std::log(m) - ref(r, c);
          const S sign = diff > S(0) ? S(1) : (diff < S(0) ? S(-1) : S(0));
          dmel(r, c) = gscale * inv_n * sign / m;
        }
      Mat<S> dmag = ctx->filterbanks[sc].transpose() * dmel;
      stft_magnitude_backward<S>(saved->specs[sc], dmag, len, dx.data());
    }
    for (int i = 0; i < len; ++i) gx(0, i) += dx[i];
  });
  return {&g, out};
}

}  // namespace ops
}  // namespace semdac
