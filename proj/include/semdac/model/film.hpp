#pragma once

#include "semdac/model/config.hpp"
#include "semdac/model/modules.hpp"

#include <map>
#include <string>
#include <vector>

namespace semdac {

// Per-channel, per-frame modulation maps for one placement point.
template <typename S>
struct FiLMParams {
  Mat<S> gamma, beta;  // channels x frames at the placement's resolution
  Placement placement = Placement::F0;
};

template <typename S>
struct FiLMParamVars {
  Var<S> gamma, beta;
  Placement placement = Placement::F0;
};

// Maps 50 Hz semantic latents to (gamma, beta) at one decoder placement:
// conv k3 -> leaky relu -> conv k3, then one transposed conv per decoder rate
// preceding the placement, then a zero-initialized k1 head split into the two
// maps. gamma starts at exactly 1 and beta at 0.
template <typename S>
struct FiLMGenerator {
  Placement placement = Placement::F0;
  int out_channels = 0;
  Conv1dLayer<S> c1, c2;
  std::vector<ConvT1dLayer<S>> ups;
  Conv1dLayer<S> head;

  void init(Placement p, const DecoderConfig& dec, int latent_dim, int hidden,
            ParamStore<S>& store, uint64_t seed) {
    placement = p;
    out_channels = dec.channels_at(p);
    const std::string base = "film." + placement_name(p);
    c1.init(base + ".c1", latent_dim, hidden, 3, 1, 1, 1, store, seed);
    c2.init(base + ".c2", hidden, hidden, 3, 1, 1, 1, store, seed);
    ups.resize((size_t)p);
    for (int i = 0; i < (int)p; ++i)
      ups[i].init(base + ".up" + std::to_string(i), hidden, hidden, dec.rates[i], store, seed);
    // near-zero head: gamma starts close to 1 and beta close to 0, so early
    // training approximates the unconditioned decoder without cutting the
    // gradient path to the trunk
    head.init(base + ".head", hidden, 2 * out_channels, 1, 1, 1, 0, store, seed,
              /*init_gain=*/0.01);
  }

  // overwrite the head so gamma == 1 and beta == 0 exactly (identity FiLM)
  void force_identity() {
    head.w.value.setZero();
    head.b.value.setZero();
  }

  FiLMParamVars<S> build(BuildCtx<S>& ctx, Var<S> semantic) const {
    Var<S> h = c1.apply(ctx, semantic);
    h = ops::leaky_relu(h, S(0.1));
    h = c2.apply(ctx, h);
    for (const auto& up : ups) {
      h = ops::leaky_relu(h, S(0.1));
      h = up.apply(ctx, h);
    }
    Var<S> gb = head.apply(ctx, h);
    Graph<S>& g = *gb.g;
    const int gi = gb.i;
    const int c = out_channels, t = gb.cols();
    // split rows [0,c) -> gamma_raw, [c,2c) -> beta
    bool needs = g.wants(gi);
    int gamma_raw = g.add(g.val(gi).topRows(c), needs, [gi, c](Graph<S>& g, const Mat<S>& gy) {
      if (g.wants(gi)) g.grad_ref(gi).topRows(c) += gy;
    });
    int beta = g.add(g.val(gi).bottomRows(c), needs, [gi, c](Graph<S>& g, const Mat<S>& gy) {
      if (g.wants(gi)) g.grad_ref(gi).bottomRows(c) += gy;
    });
    (void)t;
    FiLMParamVars<S> out;
    out.placement = placement;
    out.gamma = ops::add_scalar(Var<S>{&g, gamma_raw}, S(1));
    out.beta = {&g, beta};
    return out;
  }
};

}  // namespace semdac
