#include <catch_amalgamated.hpp>

#include "semdac/codec/codec.hpp"
#include "semdac/model/semdac_model.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace semdac;
using namespace testutil;

namespace {

// small widths keep unit tests quick; shapes are what matters here
ModelConfig tiny_config() {
  ModelConfig c;
  c.encoder.channels = {8, 8, 8, 8, 8};
  c.encoder.latent_dim = 8;
  c.decoder.channels = {8, 8, 8, 8, 8};
  c.decoder.film_hidden = 8;
  c.rvq.latent_dim = 8;
  c.rvq.semantic_size = 16;
  c.rvq.n_acoustic = 1;
  c.rvq.acoustic_size = 16;
  c.disc.channels = {4, 8};
  c.disc.post_channels = 8;
  c.teacher_dim = 12;
  return c;
}

Mat<float> wav_of(const AudioClip& c) {
  Mat<float> m(1, c.length());
  for (int i = 0; i < c.length(); ++i) m(0, i) = c.samples[i];
  return m;
}

}  // namespace

TEST_CASE("encoder frame arithmetic: 6080 -> 19, 320 -> 1, 6400 -> 20", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 1);
  for (auto [len, frames] : {std::pair{6080, 19}, {320, 1}, {6400, 20}}) {
    AudioClip c = noise(0.1, len, 16000, 7);
    auto lat = m.encode(c);
    REQUIRE(lat.n_frames() == frames);
    REQUIRE(lat.dim() == 8);
    REQUIRE(lat.frame_rate == 50);
  }
}

TEST_CASE("encoder rejects lengths off the stride grid and wrong rates", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 1);
  AudioClip c = noise(0.1, 6000, 16000, 8);  // not a multiple of 320
  REQUIRE_THROWS_AS(m.encode(c), Error);
  AudioClip wrong_rate = noise(0.1, 6080, 8000, 9);
  REQUIRE_THROWS_AS(m.encode(wrong_rate), Error);
}

TEST_CASE("film op is exact hand arithmetic", "[model]") {
  Graph<float> g;
  Mat<float> x(2, 1), ga(2, 1), be(2, 1);
  x << 1, 2;
  ga << 2, 0.5;
  be << -1, 1;
  auto y = ops::film(leaf(g, x, false), leaf(g, ga, false), leaf(g, be, false));
  REQUIRE(y.val()(0, 0) == 1.0f);  // 2*1 - 1
  REQUIRE(y.val()(1, 0) == 2.0f);  // 0.5*2 + 1

  // identity and constant modulations
  Mat<float> z = Mat<float>::Random(3, 5);
  auto id = ops::film(leaf(g, z, false), leaf(g, Mat<float>::Ones(3, 5), false),
                      leaf(g, Mat<float>::Zero(3, 5), false));
  REQUIRE(id.val() == z);
  Mat<float> b7 = Mat<float>::Constant(3, 5, 7.0f);
  auto c7 = ops::film(leaf(g, z, false), leaf(g, Mat<float>::Zero(3, 5), false),
                      leaf(g, b7, false));
  REQUIRE(c7.val() == b7);
}

TEST_CASE("film generator time lengths follow the cumulative-rate table", "[model]") {
  ModelConfig cfg = tiny_config();
  cfg.decoder.film_placements = {Placement::F0, Placement::F1, Placement::F2, Placement::F3};
  SemdacModel<float> m;
  m.init(cfg, 2);
  const int factors[4] = {1, 8, 40, 160};
  for (int frames : {1, 7, 19, 40}) {
    Graph<float> g;
    BuildCtx<float> ctx(g, false);
    Mat<float> sem = Mat<float>::Random(8, frames);
    Var<float> sem_v = leaf(g, sem, false);
    auto maps = m.build_film(ctx, sem_v);
    for (int p = 0; p < 4; ++p) {
      const auto& fp = maps.at(Placement(p));
      REQUIRE(fp.gamma.cols() == frames * factors[p]);
      REQUIRE(fp.beta.cols() == frames * factors[p]);
      REQUIRE(fp.gamma.rows() == cfg.decoder.channels_at(Placement(p)));
      REQUIRE(fp.beta.rows() == fp.gamma.rows());
    }
  }
}

TEST_CASE("film generator requesting an unconfigured placement fails", "[model]") {
  ModelConfig cfg = tiny_config();
  cfg.decoder.film_placements = {Placement::F0};
  SemdacModel<float> m;
  m.init(cfg, 3);
  REQUIRE(m.film.find(Placement::F2) == m.film.end());
  REQUIRE(m.film.find(Placement::F0) != m.film.end());
}

TEST_CASE("decoder length arithmetic and film-identity equivalence", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 4);
  for (auto& [p, gen] : m.film) gen.force_identity();  // gamma=1, beta=0 exactly
  for (int frames : {1, 19}) {
    Graph<float> g;
    BuildCtx<float> ctx(g, false);
    Mat<float> sem = Mat<float>::Random(8, frames) * 0.5f;
    Mat<float> ac = Mat<float>::Random(8, frames) * 0.5f;
    Var<float> sv = leaf(g, sem, false);
    Var<float> av = leaf(g, ac, false);
    auto with_film = m.decoder.apply(ctx, sv, av, m.build_film(ctx, sv));
    auto without = m.decoder.apply(ctx, sv, av, {});
    REQUIRE(with_film.cols() == frames * 320);
    REQUIRE(without.cols() == frames * 320);
    for (int i = 0; i < with_film.cols(); ++i)
      REQUIRE(with_film.val()(0, i) == without.val()(0, i));
  }
}

TEST_CASE("decoder output stays inside [-1, 1]", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 5);
  AudioClip c = noise(0.3, 1280, 16000, 11);
  auto latents = m.encode(c);
  auto q = rvq_forward(latents.values, m.cfg.rvq, m.rvq.codebooks());
  LatentSequence<float> sem{q.semantic_quantized, 50}, ac{q.acoustic_sum, 50};
  AudioClip out = m.decode(sem, ac);
  REQUIRE(out.length() == 1280);
  for (float s : out.samples) {
    REQUIRE(s <= 1.0f);
    REQUIRE(s >= -1.0f);
  }
}

TEST_CASE("projection head: hand cases", "[model]") {
  ParamStore<float> store;
  ProjectionHead<float> proj;
  proj.init(2, 1, store, 6);
  proj.w.value << 1.0f, 1.0f;
  proj.b.value << 0.5f;
  Mat<float> frame(2, 1);
  frame << 2.0f, 3.0f;
  REQUIRE(proj.project(frame)(0, 0) == 5.5f);

  proj.w.value.setZero();
  proj.b.value.setZero();
  REQUIRE(proj.project(frame)(0, 0) == 0.0f);

  ParamStore<float> store2;
  ProjectionHead<float> eye;
  eye.init(2, 2, store2, 7);
  eye.w.value = Mat<float>::Identity(2, 2);
  eye.b.value.setZero();
  REQUIRE(eye.project(frame) == frame);
}

TEST_CASE("codec round trip reproduces the exact input length", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 8);
  for (int len : {6080, 6000, 321, 320, 12345}) {
    AudioClip c = noise(0.2, len, 16000, 20 + len);
    AudioClip back = codec_roundtrip(m, c);
    REQUIRE(back.length() == len);
  }
}

TEST_CASE("mpd_reshape folding", "[model]") {
  std::vector<float> x(10);
  for (int i = 0; i < 10; ++i) x[i] = (float)i;
  Mat<float> m2 = mpd_reshape<float>(x, 2);
  REQUIRE(m2.rows() == 2);
  REQUIRE(m2.cols() == 5);
  REQUIRE(m2(0, 3) == 6.0f);  // x[3*2 + 0]
  REQUIRE(m2(1, 3) == 7.0f);

  Mat<float> m3 = mpd_reshape<float>(x, 3);
  REQUIRE(m3.rows() == 3);
  REQUIRE(m3.cols() == 4);
  REQUIRE(m3(0, 3) == 9.0f);
  REQUIRE(m3(1, 3) == 0.0f);  // zero pads
  REQUIRE(m3(2, 3) == 0.0f);

  Mat<float> m1 = mpd_reshape<float>(x, 1);
  REQUIRE(m1.rows() == 1);
  REQUIRE(m1.cols() == 10);
}

TEST_CASE("discriminator produces logits and layer maps per period", "[model]") {
  DiscModel<float> d;
  DiscConfig cfg;
  cfg.channels = {4, 8};
  cfg.post_channels = 8;
  d.init(cfg, 9);
  Graph<float> g;
  BuildCtx<float> ctx(g, false);
  Mat<float> wav = Mat<float>::Random(1, 6080) * 0.3f;
  auto feats = d.mpd.build(ctx, leaf(g, wav, false));
  REQUIRE(feats.subs.size() == 5);
  for (size_t s = 0; s < feats.subs.size(); ++s) {
    const int period = cfg.periods[s];
    REQUIRE((int)feats.subs[s].logits.size() == period);
    REQUIRE(feats.subs[s].layers.size() == 4);  // 2 strided + pre-post + logits
    for (const auto& v : feats.subs[s].logits) REQUIRE(v.rows() == 1);
  }
}

TEST_CASE("every generator parameter gets a gradient from the combined loss", "[model]") {
  SemdacModel<float> m;
  m.init(tiny_config(), 10);
  AudioClip c = noise(0.3, 1280, 16000, 33);

  Graph<float> g;
  BuildCtx<float> ctx(g, true);
  Var<float> z = m.encode_var(ctx, wav_of(c));
  auto q = m.rvq.build(ctx, z);
  auto film_maps = m.build_film(ctx, q.semantic_quantized);
  Var<float> fake = m.decoder.apply(ctx, q.semantic_quantized, q.acoustic_sum, film_maps);
  auto mel_ctx = std::make_shared<MelLossContext<float>>(c, MelScaleSet::standard(16000));
  Var<float> mel = ops::multiscale_mel_loss_node(fake, mel_ctx);
  Mat<float> teacher = Mat<float>::Random(12, q.semantic_quantized.cols());
  Var<float> sem = ops::mse_frames(m.projection.apply(ctx, q.semantic_quantized), teacher);
  Var<float> total = ops::weighted_sum<float>(
      {mel, sem, q.codebook_loss, q.commitment_loss}, {15.0f, 1.0f, 1.0f, 0.25f});
  g.backward(total.i);

  auto grads = ctx.collect_grads(m.params);
  for (size_t i = 0; i < m.params.count(); ++i) {
    INFO("parameter " << m.params.items[i]->name);
    REQUIRE(grads[i].size() > 0);
    REQUIRE(grads[i].allFinite());
    REQUIRE(grads[i].cwiseAbs().maxCoeff() > 0.0f);
  }
}
