#include <catch_amalgamated.hpp>

#include "semdac/loss/losses.hpp"
#include "semdac/dsp/mel.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace semdac;
using namespace testutil;
using Catch::Approx;

TEST_CASE("multiscale mel loss: zero at the fixed point, symmetric", "[losses]") {
  AudioClip a = sine(440.0, 0.4, 0.38, 16000);
  AudioClip b = noise(0.2, a.length(), 16000, 3);
  MelScaleSet scales = MelScaleSet::standard(16000);
  REQUIRE(multiscale_mel_loss<double>(a, a, scales) == 0.0);
  REQUIRE(multiscale_mel_loss<double>(a, b, scales) ==
          Approx(multiscale_mel_loss<double>(b, a, scales)).epsilon(1e-12));
  REQUIRE(multiscale_mel_loss<double>(a, b, scales) > 0.0);
  AudioClip shorter = noise(0.2, 100, 16000, 4);
  REQUIRE_THROWS_AS(multiscale_mel_loss<double>(a, shorter, scales), Error);
}

TEST_CASE("multiscale mel loss: tone vs silence matches direct recomputation", "[losses]") {
  AudioClip tone = sine(700.0, 0.4, 0.38, 16000);
  AudioClip silence;
  silence.samples.assign(tone.length(), 0.0f);
  MelScaleSet scales = MelScaleSet::standard(16000);
  double expected = 0.0;
  for (const auto& cfg : scales.configs) {
    Mat<double> lm = log_mel<double>(tone, cfg);
    expected += (lm.array() - std::log(1e-5)).abs().mean();
  }
  REQUIRE(multiscale_mel_loss<double>(tone, silence, scales) == Approx(expected).margin(1e-6));
}

TEST_CASE("adversarial losses: fixed points and hand case", "[losses]") {
  using Outs = std::vector<std::vector<Mat<double>>>;
  auto constant = [](double v) { return Mat<double>::Constant(1, 8, v); };

  Outs real_perfect{{constant(1.0)}, {constant(1.0)}};
  Outs fake_perfect{{constant(0.0)}, {constant(0.0)}};
  auto [d0, g0] = adversarial_losses(real_perfect, fake_perfect);
  REQUIRE(d0 == 0.0);

  Outs fake_fooling{{constant(1.0)}, {constant(1.0)}};
  auto [d1, g1] = adversarial_losses(real_perfect, fake_fooling);
  REQUIRE(g1 == 0.0);

  Outs real_half{{constant(0.5)}};
  Outs fake_half{{constant(0.5)}};
  auto [d2, g2] = adversarial_losses(real_half, fake_half);
  REQUIRE(d2 == Approx(0.5).epsilon(1e-12));   // (0.5-1)^2 + 0.5^2
  REQUIRE(g2 == Approx(0.25).epsilon(1e-12));  // (0.5-1)^2
}

TEST_CASE("adversarial losses sum over sub-discriminators", "[losses]") {
  using Outs = std::vector<std::vector<Mat<double>>>;
  auto constant = [](double v) { return Mat<double>::Constant(1, 4, v); };
  Outs real{{constant(0.5)}, {constant(0.5)}, {constant(0.5)}};
  Outs fake{{constant(0.5)}, {constant(0.5)}, {constant(0.5)}};
  auto [d, g] = adversarial_losses(real, fake);
  REQUIRE(d == Approx(1.5).epsilon(1e-12));
  REQUIRE(g == Approx(0.75).epsilon(1e-12));
}

TEST_CASE("feature matching: fixed point and layer summation", "[losses]") {
  using Feats = std::vector<std::vector<Mat<double>>>;
  Mat<double> f1 = Mat<double>::Random(3, 7);
  Feats real{{f1}};
  Feats fake{{f1}};
  REQUIRE(feature_matching_loss(real, fake) == 0.0);

  Feats real_g{{Mat<double>::Zero(2, 5)}};
  Feats fake_g{{Mat<double>::Constant(2, 5, 0.5)}};
  REQUIRE(feature_matching_loss(real_g, fake_g) == Approx(0.5).epsilon(1e-12));

  Feats real2{{Mat<double>::Zero(2, 5), Mat<double>::Zero(4, 3)}};
  Feats fake2{{Mat<double>::Constant(2, 5, 0.2), Mat<double>::Constant(4, 3, -0.6)}};
  REQUIRE(feature_matching_loss(real2, fake2) == Approx(0.8).epsilon(1e-12));

  Feats bad{{Mat<double>::Zero(2, 4)}};
  REQUIRE_THROWS_AS(feature_matching_loss(real_g, bad), Error);
}

TEST_CASE("distillation loss: fixed point, hand case, homogeneity", "[losses]") {
  TeacherFeatures t;
  t.values.resize(2, 2);
  t.values.setZero();
  Mat<double> projected(2, 2);
  projected << 1.0, 0.0, 0.0, 2.0;  // frame diffs (1,0) and (0,2)
  REQUIRE(distillation_loss<double>(projected, t) == Approx(2.5).epsilon(1e-12));

  Mat<double> same = t.values.cast<double>();
  REQUIRE(distillation_loss<double>(same, t) == 0.0);

  TeacherFeatures t2;
  t2.values = Mat<float>::Random(4, 6);
  Mat<double> p2 = Mat<double>::Random(4, 6);
  const double base = distillation_loss<double>(p2, t2);
  TeacherFeatures t3;
  t3.values = t2.values * 3.0f;
  const double scaled = distillation_loss<double>((p2 * 3.0).eval(), t3);
  REQUIRE(scaled == Approx(9.0 * base).epsilon(1e-9));

  Mat<double> empty(4, 0);
  TeacherFeatures te;
  te.values.resize(4, 0);
  REQUIRE_THROWS_AS(distillation_loss<double>(empty, te), Error);
}

TEST_CASE("distillation loss matches a naive double loop", "[losses]") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + (int)rng.below(64);
    const int frames = 1 + (int)rng.below(32);
    TeacherFeatures t;
    t.values.resize(dim, frames);
    Mat<double> p(dim, frames);
    for (int d = 0; d < dim; ++d)
      for (int f = 0; f < frames; ++f) {
        t.values(d, f) = (float)rng.normal();
        p(d, f) = rng.normal();
      }
    double naive = 0.0;
    for (int f = 0; f < frames; ++f) {
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double diff = p(d, f) - (double)t.values(d, f);
        acc += diff * diff;
      }
      naive += acc;
    }
    naive /= frames;
    REQUIRE(distillation_loss<double>(p, t) == Approx(naive).margin(1e-9));
  }
}

TEST_CASE("total generator loss: weighted-sum identity", "[losses]") {
  LossWeights w;
  LossBundle zero = total_generator_loss(0, 0, 0, 0, 0, 0, w);
  REQUIRE(zero.total == 0.0);

  LossBundle ones = total_generator_loss(1, 1, 1, 1, 1, 1, w);
  REQUIRE(ones.total == Approx(20.25).epsilon(1e-12));

  LossBundle mel2 = total_generator_loss(2, 0, 0, 0, 0, 0, w);
  REQUIRE(mel2.total == Approx(30.0).epsilon(1e-12));

  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const double m = rng.next_double(), f = rng.next_double(), a = rng.next_double();
    const double cb = rng.next_double(), cm = rng.next_double(), s = rng.next_double();
    LossBundle b = total_generator_loss(m, f, a, cb, cm, s, w);
    const double expect = 15.0 * m + 2.0 * f + 1.0 * a + 1.0 * cb + 0.25 * cm + 1.0 * s;
    REQUIRE(std::abs(b.total - expect) < 1e-9);
  }
}

TEST_CASE("total generator loss rejects non-finite terms by name", "[losses]") {
  LossWeights w;
  try {
    total_generator_loss(0.1, std::nan(""), 0, 0, 0, 0, w);
    FAIL("expected numeric error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == Err::numeric);
    REQUIRE(std::string(e.what()).find("feature_match") != std::string::npos);
  }
}

TEST_CASE("default loss weights follow the training objective", "[losses]") {
  LossWeights w;
  REQUIRE(w.mel == 15.0);
  REQUIRE(w.feature_match == 2.0);
  REQUIRE(w.adversarial == 1.0);
  REQUIRE(w.codebook == 1.0);
  REQUIRE(w.commitment == 0.25);
  REQUIRE(w.semantic == 1.0);
}
