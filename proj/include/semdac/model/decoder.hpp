#pragma once

#include "semdac/model/config.hpp"
#include "semdac/model/film.hpp"
#include "semdac/model/modules.hpp"

#include <map>
#include <string>
#include <vector>

namespace semdac {

// Mirror of the encoder: pre-conv on the concatenated semantic+acoustic
// latents, four [snake, transposed-conv, 3x residual-unit] blocks, snake,
// output conv, tanh. FiLM maps are applied at the configured placements:
// F0 right after the pre-conv, Fi right after block i-1.
template <typename S>
struct Decoder {
  DecoderConfig cfg;
  int latent_dim = 0;
  Conv1dLayer<S> pre;
  struct Block {
    SnakeLayer<S> snake;
    ConvT1dLayer<S> up;
    ResidualUnit<S> res[3];
  };
  std::vector<Block> blocks;
  SnakeLayer<S> final_snake;
  Conv1dLayer<S> final_conv;

  void init(const DecoderConfig& c, int latent, ParamStore<S>& store, uint64_t seed) {
    cfg = c;
    latent_dim = latent;
    pre.init("dec.pre", 2 * latent, cfg.channels[0], 7, 1, 1, 3, store, seed);
    blocks.resize(cfg.rates.size());
    static const int dil[3] = {1, 3, 9};
    for (size_t i = 0; i < cfg.rates.size(); ++i) {
      const std::string base = "dec.b" + std::to_string(i);
      const int cin = cfg.channels[i], cout = cfg.channels[i + 1];
      blocks[i].snake.init(base + ".snake", cin, store);
      blocks[i].up.init(base + ".up", cin, cout, cfg.rates[i], store, seed);
      for (int r = 0; r < 3; ++r)
        blocks[i].res[r].init(base + ".res" + std::to_string(r), cout, dil[r], store, seed);
    }
    final_snake.init("dec.final_snake", cfg.channels.back(), store);
    final_conv.init("dec.final", cfg.channels.back(), 1, 7, 1, 1, 3, store, seed);
  }

  // film: one entry per configured placement (absent entries are skipped,
  // which is exactly the "FiLM disabled" decoder).
  Var<S> apply(BuildCtx<S>& ctx, Var<S> semantic_q, Var<S> acoustic_sum,
               const std::map<Placement, FiLMParamVars<S>>& film) const {
    require(semantic_q.rows() == latent_dim && acoustic_sum.rows() == latent_dim, Err::value,
            "decoder latent dim mismatch");
    require(semantic_q.cols() == acoustic_sum.cols(), Err::value,
            "semantic/acoustic frame count mismatch");
    Var<S> h = pre.apply(ctx, ops::concat_rows(semantic_q, acoustic_sum));
    h = maybe_film(h, film, Placement::F0);
    for (size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      Var<S> u = b.snake.apply(ctx, h);
      u = b.up.apply(ctx, u);
      for (int r = 0; r < 3; ++r) u = b.res[r].apply(ctx, u);
      h = u;
      if (i + 1 < blocks.size()) h = maybe_film(h, film, Placement(int(i) + 1));
    }
    h = final_snake.apply(ctx, h);
    h = final_conv.apply(ctx, h);
    return ops::tanh_op(h);
  }

 private:
  static Var<S> maybe_film(Var<S> h, const std::map<Placement, FiLMParamVars<S>>& film,
                           Placement p) {
    auto it = film.find(p);
    if (it == film.end()) return h;
    require(it->second.gamma.rows() == h.rows() && it->second.gamma.cols() == h.cols(),
            Err::value, "film map shape mismatch at " + placement_name(p));
    return ops::film(h, it->second.gamma, it->second.beta);
  }
};

}  // namespace semdac
