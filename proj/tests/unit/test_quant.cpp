#include <catch_amalgamated.hpp>

#include "semdac/quant/presets.hpp"
#include "semdac/quant/rvq.hpp"

#include <cmath>

using namespace semdac;
using Catch::Approx;

namespace {

template <typename S>
Codebook<S> book(std::initializer_list<std::initializer_list<S>> rows) {
  Codebook<S> cb;
  cb.entries.resize((int)rows.size(), (int)rows.begin()->size());
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (S v : row) cb.entries(r, c++) = v;
    ++r;
  }
  return cb;
}

}  // namespace

TEST_CASE("nearest_code: exact entry wins", "[quant]") {
  auto cb = init_codebook<double>(16, 4, 123);
  for (int k : {0, 3, 15}) {
    Mat<double> v = cb.entries.row(k).transpose();
    REQUIRE(nearest_code<double>(v, cb) == k);
  }
}

TEST_CASE("nearest_code: hand-checked two-entry case", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> v(2, 1);
  v << 0.4, 0.4;  // distances 0.32 vs 0.72
  REQUIRE(nearest_code<double>(v, cb) == 0);
}

TEST_CASE("nearest_code: exact tie breaks to the lowest index", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> v(2, 1);
  v << 0.5, 0.5;  // equal distances 0.5
  REQUIRE(nearest_code<double>(v, cb) == 0);
}

TEST_CASE("nearest_code: NaN input is an error", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> v(2, 1);
  v << std::nan(""), 0.0;
  REQUIRE_THROWS_AS(nearest_code<double>(v, cb), Error);
}

TEST_CASE("vq_forward: exact codebook columns give zero losses", "[quant]") {
  auto cb = init_codebook<double>(8, 3, 5);
  Mat<double> z(3, 4);
  for (int t = 0; t < 4; ++t) z.col(t) = cb.entries.row(t * 2).transpose();
  auto r = vq_forward(z, cb);
  REQUIRE(r.codebook_loss == 0.0);
  REQUIRE(r.commitment_loss == 0.0);
  for (int t = 0; t < 4; ++t) REQUIRE(r.indices[t] == t * 2);
}

TEST_CASE("vq_forward: hand arithmetic on one frame", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> z(2, 1);
  z << 0.4, 0.4;
  auto r = vq_forward(z, cb);
  REQUIRE(r.commitment_loss == Approx(0.32).epsilon(1e-12));
  REQUIRE(r.codebook_loss == Approx(0.32).epsilon(1e-12));
  REQUIRE(r.quantized(0, 0) == 0.0);
  REQUIRE(r.quantized(1, 0) == 0.0);
}

TEST_CASE("vq_forward: losses average over frames", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> z(2, 2);
  z.col(0) << 0.4, 0.4;  // squared distance 0.32
  z.col(1) << 0.2, 0.2;  // squared distance 0.08
  auto r = vq_forward(z, cb);
  REQUIRE(r.codebook_loss == Approx(0.20).epsilon(1e-12));
}

TEST_CASE("vq_forward: empty frame axis gives zero losses", "[quant]") {
  auto cb = book<double>({{0.0, 0.0}, {1.0, 1.0}});
  Mat<double> z(2, 0);
  auto r = vq_forward(z, cb);
  REQUIRE(r.codebook_loss == 0.0);
  REQUIRE(r.quantized.cols() == 0);
}

TEST_CASE("rvq: latents inside the semantic codebook leave no residual", "[quant]") {
  RVQConfig cfg;
  cfg.semantic_size = 8;
  cfg.n_acoustic = 0;
  cfg.latent_dim = 3;
  auto sem = init_codebook<double>(8, 3, 7);
  Mat<double> z(3, 2);
  z.col(0) = sem.entries.row(1).transpose();
  z.col(1) = sem.entries.row(5).transpose();
  auto out = rvq_forward(z, cfg, {sem});
  REQUIRE((z - out.semantic_quantized).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(out.acoustic_sum.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(out.grid.codes(0, 0) == 1);
  REQUIRE(out.grid.codes(0, 1) == 5);
}

TEST_CASE("rvq: two-stage scalar enumeration", "[quant]") {
  RVQConfig cfg;
  cfg.semantic_size = 2;
  cfg.n_acoustic = 1;
  cfg.acoustic_size = 3;
  cfg.latent_dim = 1;
  auto sem = book<double>({{0.0}, {1.0}});
  auto ac = book<double>({{-0.25}, {0.0}, {0.25}});
  Mat<double> z(1, 1);
  z << 0.8;
  auto out = rvq_forward(z, cfg, {sem, ac});
  REQUIRE(out.semantic_quantized(0, 0) == 1.0);   // residual -0.2
  REQUIRE(out.acoustic_sum(0, 0) == -0.25);       // nearest to -0.2
  const double final_residual = 0.8 - 1.0 + 0.25;
  REQUIRE(final_residual == Approx(0.05).epsilon(1e-12));
  REQUIRE(out.grid.codes(0, 0) == 1);
  REQUIRE(out.grid.codes(1, 0) == 0);
}

TEST_CASE("rvq: all-zero codebooks quantize everything to zero", "[quant]") {
  RVQConfig cfg;
  cfg.semantic_size = 4;
  cfg.n_acoustic = 2;
  cfg.acoustic_size = 4;
  cfg.latent_dim = 2;
  std::vector<Codebook<double>> books(3);
  for (auto& b : books) b.entries = Mat<double>::Zero(4, 2);
  Mat<double> z(2, 3);
  z << 0.3, -0.7, 0.1, 0.9, 0.2, -0.4;
  auto out = rvq_forward(z, cfg, books);
  REQUIRE(out.semantic_quantized.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(out.acoustic_sum.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rvq: residual norms shrink when every codebook holds a zero row", "[quant]") {
  // fixture: row 0 of every codebook is the zero vector, so stage k can
  // always fall back to "add nothing" and the residual never grows
  RVQConfig cfg;
  cfg.semantic_size = 16;
  cfg.n_acoustic = 3;
  cfg.acoustic_size = 16;
  cfg.latent_dim = 6;
  Rng rng(31);
  std::vector<Codebook<double>> books;
  for (int q = 0; q < 4; ++q) {
    auto cb = init_codebook<double>(16, 6, rng.next_u64());
    cb.entries.row(0).setZero();
    books.push_back(cb);
  }
  Mat<double> z(6, 40);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 40; ++c) z(r, c) = rng.normal();

  Mat<double> residual = z;
  for (int q = 0; q < 4; ++q) {
    auto vr = vq_forward(residual, books[q]);
    for (int t = 0; t < 40; ++t) {
      const double before = residual.col(t).squaredNorm();
      const double after = (residual.col(t) - vr.quantized.col(t)).squaredNorm();
      REQUIRE(after <= before + 1e-12);
    }
    residual -= vr.quantized;
  }
}

TEST_CASE("nearest codes agree with brute force on random instances", "[quant]") {
  Rng rng(77);
  for (int size : {16, 128}) {
    auto cb = init_codebook<double>(size, 8, rng.next_u64());
    Mat<double> z(8, 50);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 50; ++c) z(r, c) = rng.normal();
    auto idx = nearest_codes(z, cb);
    for (int t = 0; t < 50; ++t) {
      int best = 0;
      double best_d = 1e300;
      for (int k = 0; k < size; ++k) {
        const double d = (cb.entries.row(k).transpose() - z.col(t)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      REQUIRE(idx[t] == best);
    }
  }
}

TEST_CASE("bits_per_frame and bitrate arithmetic", "[quant]") {
  REQUIRE(bits_per_frame({512, 1024}) == 19);
  REQUIRE(bits_per_frame({512, 1024, 1024, 1024}) == 39);
  REQUIRE(bits_per_frame({2}) == 1);
  REQUIRE(bits_per_frame({3}) == 2);
  REQUIRE_THROWS_AS(bits_per_frame({1}), Error);
  REQUIRE_THROWS_AS(bits_per_frame({}), Error);

  REQUIRE(bitrate_kbps({512, 1024}, 50.0) == 0.95);
  REQUIRE(bitrate_kbps({512, 1024, 1024, 1024}, 50.0) == 1.95);
  REQUIRE(bitrate_kbps({128, 1024, 1024, 1024}, 50.0) == 1.85);
  REQUIRE(bitrate_kbps({1024, 1024}, 50.0) == 1.0);
  REQUIRE_THROWS_AS(bitrate_kbps({512}, 0.0), Error);
}

TEST_CASE("every shipped preset reproduces its published bitrate exactly", "[quant]") {
  for (const auto& p : shipped_presets())
    REQUIRE(bitrate_kbps(p.sizes, 50.0) == p.expected_kbps);
}

TEST_CASE("init_codebook: deterministic, scaled, finite", "[quant]") {
  auto a = init_codebook<float>(64, 32, 99);
  auto b = init_codebook<float>(64, 32, 99);
  REQUIRE(a.entries == b.entries);
  auto c = init_codebook<float>(64, 32, 100);
  REQUIRE(a.entries != c.entries);

  double norm_acc = 0.0;
  for (int i = 0; i < 64; ++i) norm_acc += a.entries.row(i).norm();
  REQUIRE(norm_acc / 64.0 == Approx(1.0).margin(0.2));

  auto tiny = init_codebook<double>(2, 1, 3);
  REQUIRE(std::isfinite(tiny.entries(0, 0)));
  REQUIRE(std::isfinite(tiny.entries(1, 0)));
  REQUIRE_THROWS_AS(init_codebook<double>(1, 4, 3), Error);
}

TEST_CASE("token grid validation rejects out-of-range codes", "[quant]") {
  TokenGrid g;
  g.codes.resize(2, 3);
  g.codes.setZero();
  g.codebook_sizes = {4, 4};
  g.validate();
  g.codes(1, 2) = 4;
  REQUIRE_THROWS_AS(g.validate(), Error);
}
