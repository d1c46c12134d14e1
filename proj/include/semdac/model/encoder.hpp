#pragma once

#include "semdac/model/config.hpp"
#include "semdac/model/modules.hpp"

#include <string>
#include <vector>

namespace semdac {

// pre-conv + four [3x residual-unit, snake, strided-conv] blocks + final conv.
// Input is a 1 x T waveform (T a multiple of the stride product); output is
// latent_dim x (T / 320) at 16 kHz.
template <typename S>
struct Encoder {
  EncoderConfig cfg;
  Conv1dLayer<S> pre;
  struct Block {
    ResidualUnit<S> res[3];
    SnakeLayer<S> snake;
    Conv1dLayer<S> down;
  };
  std::vector<Block> blocks;
  SnakeLayer<S> final_snake;
  Conv1dLayer<S> final_conv;

  void init(const EncoderConfig& c, ParamStore<S>& store, uint64_t seed) {
    cfg = c;
    cfg.validate();
    pre.init("enc.pre", 1, cfg.channels[0], 7, 1, 1, 3, store, seed);
    blocks.resize(cfg.strides.size());
    static const int dil[3] = {1, 3, 9};
    for (size_t i = 0; i < cfg.strides.size(); ++i) {
      const std::string base = "enc.b" + std::to_string(i);
      const int cin = cfg.channels[i], cout = cfg.channels[i + 1];
      for (int r = 0; r < 3; ++r)
        blocks[i].res[r].init(base + ".res" + std::to_string(r), cin, dil[r], store, seed);
      blocks[i].snake.init(base + ".snake", cin, store);
      const int s = cfg.strides[i];
      blocks[i].down.init(base + ".down", cin, cout, 2 * s, s, 1, (s + 1) / 2, store, seed);
    }
    final_snake.init("enc.final_snake", cfg.channels.back(), store);
    final_conv.init("enc.final", cfg.channels.back(), cfg.latent_dim, 3, 1, 1, 1, store, seed);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> wav) const {
    require(wav.rows() == 1, Err::value, "encoder expects a 1 x T waveform");
    require(wav.cols() % cfg.stride_product() == 0, Err::value,
            "encoder input length must be a multiple of the stride product");
    Var<S> h = pre.apply(ctx, wav);
    for (const auto& b : blocks) {
      for (int r = 0; r < 3; ++r) h = b.res[r].apply(ctx, h);
      h = b.snake.apply(ctx, h);
      h = b.down.apply(ctx, h);
    }
    h = final_snake.apply(ctx, h);
    return final_conv.apply(ctx, h);
  }
};

}  // namespace semdac
