#pragma once

#include "semdac/core/common.hpp"

#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace semdac {

enum class Placement { F0 = 0, F1 = 1, F2 = 2, F3 = 3 };

inline std::string placement_name(Placement p) {
  switch (p) {
    case Placement::F0: return "F0";
    case Placement::F1: return "F1";
    case Placement::F2: return "F2";
    case Placement::F3: return "F3";
  }
  return "?";
}

struct EncoderConfig {
  std::vector<int> strides{2, 4, 5, 8};
  // channels[0] is the pre-conv width, channels[i+1] the output of block i
  std::vector<int> channels{32, 32, 48, 64, 96};
  int latent_dim = 64;

  int stride_product() const {
    int p = 1;
    for (int s : strides) p *= s;
    return p;
  }

  void validate() const {
    require(channels.size() == strides.size() + 1, Err::config,
            "encoder needs one channel width per block plus the pre-conv width");
    require(latent_dim >= 1, Err::config, "latent_dim must be positive");
    for (int s : strides) require(s >= 1, Err::config, "encoder strides must be >= 1");
    for (int c : channels) require(c >= 1, Err::config, "encoder channels must be >= 1");
  }
};

struct DecoderConfig {
  std::vector<int> rates{8, 5, 4, 2};
  // channels[0] is the pre-conv width, channels[i+1] the output of block i
  std::vector<int> channels{96, 64, 48, 32, 32};
  std::set<Placement> film_placements{Placement::F0};
  int film_hidden = 32;

  void validate(const EncoderConfig& enc) const {
    require(rates.size() == enc.strides.size(), Err::config, "decoder rate count mismatch");
    for (size_t i = 0; i < rates.size(); ++i)
      require(rates[i] == enc.strides[enc.strides.size() - 1 - i], Err::config,
              "decoder rates must reverse the encoder strides");
    require(channels.size() == rates.size() + 1, Err::config,
            "decoder needs one channel width per block plus the pre-conv width");
    require(film_hidden >= 1, Err::config, "film_hidden must be positive");
  }

  // cumulative upsampling factor applied before each FiLM placement
  int cumulative_rate(Placement p) const {
    int f = 1;
    for (int i = 0; i < (int)p; ++i) f *= rates[i];
    return f;
  }

  // decoder feature-map width at a placement point
  int channels_at(Placement p) const { return channels[(int)p]; }
};

struct RVQConfig {
  int semantic_size = 512;
  int n_acoustic = 3;
  int acoustic_size = 1024;
  int latent_dim = 64;
  bool quantizer_dropout = false;  // off by default; bitrates are per-model

  std::vector<int> codebook_sizes() const {
    std::vector<int> sizes{semantic_size};
    for (int i = 0; i < n_acoustic; ++i) sizes.push_back(acoustic_size);
    return sizes;
  }

  void validate() const {
    require(semantic_size >= 2, Err::config, "semantic codebook needs >= 2 entries");
    require(n_acoustic >= 0, Err::config, "n_acoustic must be >= 0");
    require(n_acoustic == 0 || acoustic_size >= 2, Err::config,
            "acoustic codebooks need >= 2 entries");
    require(latent_dim >= 1, Err::config, "latent_dim must be positive");
  }
};

struct DiscConfig {
  std::vector<int> periods{2, 3, 5, 7, 11};
  std::vector<int> channels{16, 32, 64};  // strided k5/s3 layers
  int post_channels = 64;                 // extra stride-1 k5 layer before the logit conv

  void validate() const {
    require(!periods.empty(), Err::config, "discriminator needs at least one period");
    for (int p : periods) require(p >= 1, Err::config, "periods must be >= 1");
    require(!channels.empty(), Err::config, "discriminator needs conv channels");
  }
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  RVQConfig rvq;
  DiscConfig disc;
  int sample_rate = 16000;
  int teacher_dim = 768;

  int hop_total() const { return encoder.stride_product(); }
  int frame_rate() const { return sample_rate / hop_total(); }

  void validate() const {
    encoder.validate();
    decoder.validate(encoder);
    rvq.validate();
    disc.validate();
    require(rvq.latent_dim == encoder.latent_dim, Err::config,
            "rvq latent_dim must equal encoder latent_dim");
    require(sample_rate % hop_total() == 0, Err::config,
            "sample rate must be a multiple of the stride product");
  }

  // latent_dim 64 / base 32 widths; fits CPU training at the smoke scale
  static ModelConfig desk() { return ModelConfig{}; }

  // DAC-16kHz-like widths (doubling encoder, halving decoder)
  static ModelConfig paper() {
    ModelConfig c;
    c.encoder.channels = {64, 128, 256, 512, 1024};
    c.encoder.latent_dim = 1024;
    c.decoder.channels = {1536, 768, 384, 192, 96};
    c.decoder.film_hidden = 128;
    c.rvq.latent_dim = 1024;
    c.disc.channels = {32, 128, 512};
    c.disc.post_channels = 1024;
    return c;
  }
};

}  // namespace semdac
