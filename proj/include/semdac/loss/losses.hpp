#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"
#include "semdac/dsp/mel.hpp"
#include "semdac/teacher/teacher.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace semdac {

struct LossWeights {
  double mel = 15.0;
  double feature_match = 2.0;
  double adversarial = 1.0;
  double codebook = 1.0;
  double commitment = 0.25;
  double semantic = 1.0;
};

struct LossBundle {
  double mel = 0.0;
  double feature_match = 0.0;
  double adversarial = 0.0;
  double codebook = 0.0;
  double commitment = 0.0;
  double semantic = 0.0;
  double total = 0.0;
};

// Sum over the seven scales of the mean absolute log-mel difference.
template <typename S>
S multiscale_mel_loss(const AudioClip& ref, const AudioClip& gen, const MelScaleSet& scales) {
  require(ref.length() == gen.length(), Err::value, "mel loss needs equal lengths");
  S total = S(0);
  for (const auto& cfg : scales.configs) {
    Mat<S> a = log_mel<S>(ref, cfg);
    Mat<S> b = log_mel<S>(gen, cfg);
    total += (a - b).array().abs().mean();
  }
  return total;
}

// LSGAN objective over per-sub-discriminator output lists.
template <typename S>
std::pair<S, S> adversarial_losses(const std::vector<std::vector<Mat<S>>>& real,
                                   const std::vector<std::vector<Mat<S>>>& fake) {
  require(real.size() == fake.size(), Err::value, "adversarial sub-discriminator count mismatch");
  S d_loss = S(0), g_loss = S(0);
  for (size_t s = 0; s < real.size(); ++s) {
    require(real[s].size() == fake[s].size(), Err::value, "adversarial output count mismatch");
    S d_real = S(0), d_fake = S(0), g = S(0);
    long n_real = 0, n_fake = 0;
    for (const auto& m : real[s]) {
      d_real += (m.array() - S(1)).square().sum();
      n_real += m.size();
    }
    for (const auto& m : fake[s]) {
      d_fake += m.array().square().sum();
      g += (m.array() - S(1)).square().sum();
      n_fake += m.size();
    }
    require(n_real > 0 && n_fake > 0, Err::value, "empty discriminator outputs");
    d_loss += d_real / S(n_real) + d_fake / S(n_fake);
    g_loss += g / S(n_fake);
  }
  return {d_loss, g_loss};
}

// Sum over sub-discriminators and layers of mean |real_l - fake_l|.
template <typename S>
S feature_matching_loss(const std::vector<std::vector<Mat<S>>>& real,
                        const std::vector<std::vector<Mat<S>>>& fake) {
  require(real.size() == fake.size(), Err::value, "feature-matching sub count mismatch");
  S total = S(0);
  for (size_t s = 0; s < real.size(); ++s) {
    require(real[s].size() == fake[s].size(), Err::value, "feature-matching layer count mismatch");
    for (size_t l = 0; l < real[s].size(); ++l) {
      require(real[s][l].rows() == fake[s][l].rows() && real[s][l].cols() == fake[s][l].cols(),
              Err::value, "feature-matching shape mismatch");
      total += (real[s][l] - fake[s][l]).array().abs().mean();
    }
  }
  return total;
}

// Eq.-style semantic distillation: mean over frames of the squared Euclidean
// distance between projected semantic latents and teacher features.
template <typename S>
S distillation_loss(const Mat<S>& projected, const TeacherFeatures& teacher) {
  require(projected.rows() == teacher.values.rows(), Err::value, "distillation dim mismatch");
  require(projected.cols() == teacher.values.cols(), Err::value, "distillation frame mismatch");
  require(projected.cols() >= 1, Err::value, "distillation needs at least one frame");
  S acc = S(0);
  for (int t = 0; t < projected.cols(); ++t)
    acc += (projected.col(t) - teacher.values.col(t).template cast<S>()).squaredNorm();
  return acc / S(projected.cols());
}

inline LossBundle total_generator_loss(double mel, double feature_match, double adversarial,
                                       double codebook, double commitment, double semantic,
                                       const LossWeights& w) {
  auto check = [](double v, const char* name) {
    require(std::isfinite(v), Err::numeric, std::string("non-finite loss term: ") + name);
  };
  check(mel, "mel");
  check(feature_match, "feature_match");
  check(adversarial, "adversarial");
  check(codebook, "codebook");
  check(commitment, "commitment");
  check(semantic, "semantic");
  LossBundle b;
  b.mel = mel;
  b.feature_match = feature_match;
  b.adversarial = adversarial;
  b.codebook = codebook;
  b.commitment = commitment;
  b.semantic = semantic;
  b.total = w.mel * mel + w.feature_match * feature_match + w.adversarial * adversarial +
            w.codebook * codebook + w.commitment * commitment + w.semantic * semantic;
  return b;
}

}  // namespace semdac
