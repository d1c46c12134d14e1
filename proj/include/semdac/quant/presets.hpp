#pragma once

#include "semdac/quant/rvq.hpp"

#include <string>
#include <vector>

namespace semdac {

// Shipped quantizer-stack presets and the bitrates they must reproduce at the
// 50 Hz frame rate (16000 / 320).
struct BitratePreset {
  std::string name;
  std::vector<int> sizes;  // row 0 semantic, rest acoustic
  double expected_kbps;
};

inline const std::vector<BitratePreset>& shipped_presets() {
  static const std::vector<BitratePreset> presets = {
      {"semdac-0.95", {512, 1024}, 0.95},
      {"semdac-1.95", {512, 1024, 1024, 1024}, 1.95},
      {"semdac-2.95", {512, 1024, 1024, 1024, 1024, 1024}, 2.95},
      {"dac-1.0", {1024, 1024}, 1.0},
      {"dac-2.0", {1024, 1024, 1024, 1024}, 2.0},
      {"dac-2.5", {1024, 1024, 1024, 1024, 1024}, 2.5},
      {"dac-3.0", {1024, 1024, 1024, 1024, 1024, 1024}, 3.0},
      {"abl-sem1024", {1024, 1024, 1024, 1024}, 2.0},
      {"abl-sem512", {512, 1024, 1024, 1024}, 1.95},
      {"abl-sem256", {256, 1024, 1024, 1024}, 1.9},
      {"abl-sem128", {128, 1024, 1024, 1024}, 1.85},
  };
  return presets;
}

inline RVQConfig preset_rvq(const BitratePreset& p, int latent_dim) {
  RVQConfig c;
  c.semantic_size = p.sizes[0];
  c.n_acoustic = (int)p.sizes.size() - 1;
  c.acoustic_size = c.n_acoustic > 0 ? p.sizes[1] : 1024;
  c.latent_dim = latent_dim;
  return c;
}

}  // namespace semdac
