#pragma once

#include "semdac/model/config.hpp"
#include "semdac/model/modules.hpp"

#include <string>
#include <vector>

namespace semdac {

// Fold a waveform at a fixed period: row i holds x[i], x[i+p], x[i+2p], ...
// zero-padded to a full final column. This is the multi-period
// discriminator's input construction.
template <typename S>
Mat<S> mpd_reshape(const std::vector<float>& x, int period) {
  require(period >= 1, Err::value, "period must be >= 1");
  const int len = (int)x.size();
  const int width = period > 0 ? (len + period - 1) / period : 0;
  Mat<S> out = Mat<S>::Zero(period, std::max(width, 0));
  for (int i = 0; i < len; ++i) out(i % period, i / period) = (S)x[i];
  return out;
}

template <typename S>
struct DiscFeatures {
  struct SubOut {
    std::vector<Var<S>> logits;               // one per phase, equal lengths
    std::vector<std::vector<Var<S>>> layers;  // layers[l][phase]
  };
  std::vector<SubOut> subs;  // one per period
};

// One sub-discriminator per period; within a period the conv stack runs on
// each phase row with shared weights (the (k,1)-kernel 2-D conv of HiFi-GAN
// decomposed into independent 1-D passes).
template <typename S>
struct MultiPeriodDiscriminator {
  DiscConfig cfg;
  struct Sub {
    int period = 1;
    std::vector<Conv1dLayer<S>> convs;  // strided k5/s3 stack
    Conv1dLayer<S> pre_post;            // stride-1 k5
    Conv1dLayer<S> post;                // k3 -> 1 logit channel
  };
  std::vector<Sub> subs;

  void init(const DiscConfig& c, ParamStore<S>& store, uint64_t seed) {
    cfg = c;
    cfg.validate();
    subs.resize(cfg.periods.size());
    for (size_t s = 0; s < subs.size(); ++s) {
      Sub& sub = subs[s];
      sub.period = cfg.periods[s];
      const std::string base = "disc.p" + std::to_string(sub.period);
      int cin = 1;
      for (size_t l = 0; l < cfg.channels.size(); ++l) {
        sub.convs.emplace_back();
        sub.convs.back().init(base + ".c" + std::to_string(l), cin, cfg.channels[l], 5, 3, 1, 2,
                              store, seed);
        cin = cfg.channels[l];
      }
      sub.pre_post.init(base + ".pp", cin, cfg.post_channels, 5, 1, 1, 2, store, seed);
      sub.post.init(base + ".post", cfg.post_channels, 1, 3, 1, 1, 1, store, seed);
    }
  }

  // wav: 1 x T graph value (gradients flow back to it in the generator step)
  DiscFeatures<S> build(BuildCtx<S>& ctx, Var<S> wav) const {
    DiscFeatures<S> out;
    const size_t n_layers = cfg.channels.size() + 2;  // + pre_post + logits
    const int len = wav.cols();
    for (const auto& sub : subs) {
      typename DiscFeatures<S>::SubOut so;
      so.layers.resize(n_layers);
      const int width = (len + sub.period - 1) / sub.period;
      for (int phase = 0; phase < sub.period; ++phase) {
        Var<S> h = ops::phase_slice(wav, sub.period, phase, width);
        size_t layer = 0;
        for (const auto& conv : sub.convs) {
          h = ops::leaky_relu(conv.apply(ctx, h), S(0.1));
          so.layers[layer++].push_back(h);
        }
        h = ops::leaky_relu(sub.pre_post.apply(ctx, h), S(0.1));
        so.layers[layer++].push_back(h);
        h = sub.post.apply(ctx, h);
        so.layers[layer++].push_back(h);
        so.logits.push_back(h);
      }
      out.subs.push_back(std::move(so));
    }
    return out;
  }
};

}  // namespace semdac
