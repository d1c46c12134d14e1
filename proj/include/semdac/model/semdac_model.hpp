#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/model/config.hpp"
#include "semdac/model/decoder.hpp"
#include "semdac/model/discriminator.hpp"
#include "semdac/model/encoder.hpp"
#include "semdac/model/film.hpp"
#include "semdac/model/projection.hpp"
#include "semdac/quant/rvq.hpp"

#include <map>
#include <memory>

namespace semdac {

// Latent sequence at the codec frame rate (50 Hz at 16 kHz / stride 320).
template <typename S>
struct LatentSequence {
  Mat<S> values;  // latent_dim x n_frames
  int frame_rate = 50;

  int dim() const { return (int)values.rows(); }
  int n_frames() const { return (int)values.cols(); }
};

// Generator side of SemDAC: encoder, RVQ with the semantic/acoustic split,
// FiLM generators, decoder, and the teacher projection head. All parameters
// live in `params`; graphs are built per forward pass.
template <typename S>
struct SemdacModel {
  ModelConfig cfg;
  ParamStore<S> params;
  Encoder<S> encoder;
  RVQModule<S> rvq;
  std::map<Placement, FiLMGenerator<S>> film;
  Decoder<S> decoder;
  ProjectionHead<S> projection;

  void init(const ModelConfig& c, uint64_t seed) {
    cfg = c;
    cfg.validate();
    encoder.init(cfg.encoder, params, seed);
    rvq.init(cfg.rvq, params, seed);
    for (Placement p : cfg.decoder.film_placements) {
      film[p] = FiLMGenerator<S>();
      film[p].init(p, cfg.decoder, cfg.encoder.latent_dim, cfg.decoder.film_hidden, params, seed);
    }
    decoder.init(cfg.decoder, cfg.encoder.latent_dim, params, seed);
    projection.init(cfg.encoder.latent_dim, cfg.teacher_dim, params, seed);
  }

  // waveform (1 x T, T multiple of hop) -> latents, as a graph op
  Var<S> encode_var(BuildCtx<S>& ctx, const Mat<S>& wav) const {
    Var<S> w = leaf(ctx.g, wav, false);
    return encoder.apply(ctx, w);
  }

  // inference encode: clip (already hop-padded) -> latent sequence
  LatentSequence<S> encode(const AudioClip& clip) const {
    require(clip.sample_rate == cfg.sample_rate, Err::value, "sample rate mismatch");
    Graph<S> g;
    BuildCtx<S> ctx(g, /*training=*/false);
    Mat<S> wav(1, clip.length());
    for (int i = 0; i < clip.length(); ++i) wav(0, i) = (S)clip.samples[i];
    Var<S> z = encode_var(ctx, wav);
    LatentSequence<S> out;
    out.values = z.val();
    out.frame_rate = cfg.frame_rate();
    return out;
  }

  // FiLM maps for every configured placement, as graph values
  std::map<Placement, FiLMParamVars<S>> build_film(BuildCtx<S>& ctx, Var<S> semantic_q) const {
    std::map<Placement, FiLMParamVars<S>> out;
    for (const auto& [p, gen] : film) out[p] = gen.build(ctx, semantic_q);
    return out;
  }

  // inference decode from quantized latents
  AudioClip decode(const LatentSequence<S>& semantic_q, const LatentSequence<S>& acoustic_sum) const {
    require(semantic_q.n_frames() == acoustic_sum.n_frames(), Err::value,
            "decode frame count mismatch");
    Graph<S> g;
    BuildCtx<S> ctx(g, /*training=*/false);
    Var<S> sem = leaf(g, semantic_q.values, false);
    Var<S> ac = leaf(g, acoustic_sum.values, false);
    auto film_maps = build_film(ctx, sem);
    Var<S> wav = decoder.apply(ctx, sem, ac, film_maps);
    AudioClip out;
    out.sample_rate = cfg.sample_rate;
    out.samples.resize(wav.cols());
    for (int i = 0; i < wav.cols(); ++i) out.samples[i] = (float)wav.val()(0, i);
    return out;
  }

  // token grid -> (semantic, acoustic-sum) latents by codebook lookup
  std::pair<LatentSequence<S>, LatentSequence<S>> dequantize(const TokenGrid& grid) const {
    require(grid.n_quantizers() == 1 + cfg.rvq.n_acoustic, Err::value,
            "token grid quantizer count mismatch");
    grid.validate();
    const int frames = grid.n_frames();
    LatentSequence<S> sem, ac;
    sem.values.setZero(cfg.rvq.latent_dim, frames);
    ac.values.setZero(cfg.rvq.latent_dim, frames);
    sem.frame_rate = ac.frame_rate = cfg.frame_rate();
    for (int t = 0; t < frames; ++t) {
      sem.values.col(t) = rvq.books[0].value.row(grid.codes(0, t)).transpose();
      for (int q = 1; q < grid.n_quantizers(); ++q)
        ac.values.col(t) += rvq.books[q].value.row(grid.codes(q, t)).transpose();
    }
    return {sem, ac};
  }
};

// Discriminator side, parameters separate from the generator's.
template <typename S>
struct DiscModel {
  DiscConfig cfg;
  ParamStore<S> params;
  MultiPeriodDiscriminator<S> mpd;

  void init(const DiscConfig& c, uint64_t seed) {
    cfg = c;
    mpd.init(cfg, params, seed);
  }
};

}  // namespace semdac
