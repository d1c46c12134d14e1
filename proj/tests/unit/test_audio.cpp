#include <catch_amalgamated.hpp>

#include "semdac/audio/loudness.hpp"
#include "semdac/audio/wav.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace semdac;
using namespace testutil;
using Catch::Approx;

TEST_CASE("load_wav: one second of 16-bit silence", "[audio]") {
  const auto path = temp_path("silence.wav");
  write_wav_raw(path, 1, 16, 16000, std::vector<double>(16000, 0.0));
  AudioClip c = load_wav(path);
  REQUIRE(c.sample_rate == 16000);
  REQUIRE(c.length() == 16000);
  for (float s : c.samples) REQUIRE(s == 0.0f);
}

TEST_CASE("load_wav: opposite stereo channels cancel to silence", "[audio]") {
  const auto path = temp_path("stereo_cancel.wav");
  std::vector<double> inter;
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    double v = std::lrint(rng.normal() * 8000);
    inter.push_back(v);
    inter.push_back(-v);
  }
  write_wav_raw(path, 2, 16, 16000, inter);
  AudioClip c = load_wav(path);
  REQUIRE(c.length() == 500);
  for (float s : c.samples) REQUIRE(std::abs(s) < 1e-9f);
}

TEST_CASE("load_wav: full-scale square wave integer scaling", "[audio]") {
  const auto path = temp_path("square.wav");
  std::vector<double> inter;
  for (int i = 0; i < 64; ++i) inter.push_back(i % 2 ? -32767.0 : 32767.0);
  write_wav_raw(path, 1, 16, 16000, inter);
  AudioClip c = load_wav(path);
  const float full = 32767.0f / 32768.0f;
  for (int i = 0; i < 64; ++i) REQUIRE(c.samples[i] == (i % 2 ? -full : full));
}

TEST_CASE("load_wav: 32-bit float passthrough", "[audio]") {
  const auto path = temp_path("f32.wav");
  write_wav_raw(path, 1, 32, 16000, {0.25, -0.5, 1.0});
  AudioClip c = load_wav(path);
  REQUIRE(c.samples[0] == 0.25f);
  REQUIRE(c.samples[1] == -0.5f);
  REQUIRE(c.samples[2] == 1.0f);
}

TEST_CASE("load_wav: malformed and unsupported files", "[audio]") {
  const auto bad = temp_path("bad.wav");
  {
    std::ofstream f(bad, std::ios::binary);
    f << "not a riff file at all";
  }
  REQUIRE_THROWS_AS(load_wav(bad), Error);
  REQUIRE_THROWS_AS(load_wav(temp_path("missing_file.wav")), Error);

  // 24-bit PCM is recognized but unsupported
  const auto p24 = temp_path("p24.wav");
  {
    std::ofstream f(p24, std::ios::binary);
    auto u32 = [&](uint32_t v) {
      char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
      f.write(b, 4);
    };
    auto u16 = [&](uint16_t v) {
      char b[2] = {char(v), char(v >> 8)};
      f.write(b, 2);
    };
    f.write("RIFF", 4);
    u32(36 + 6);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(1);
    u32(16000);
    u32(16000 * 3);
    u16(3);
    u16(24);
    f.write("data", 4);
    u32(6);
    f.write("\0\0\0\0\0\0", 6);
  }
  try {
    load_wav(p24);
    FAIL("expected unsupported-encoding error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == Err::unsupported);
  }
}

TEST_CASE("wav round trip through save_wav", "[audio]") {
  AudioClip c = sine(440.0, 0.5, 0.1, 16000);
  const auto path = temp_path("roundtrip.wav");
  save_wav(path, c);
  AudioClip back = load_wav(path);
  REQUIRE(back.length() == c.length());
  for (int i = 0; i < c.length(); ++i)
    REQUIRE(std::abs(back.samples[i] - c.samples[i]) < 1.0 / 32000.0);
}

TEST_CASE("measure_lufs: digital silence is -inf", "[audio]") {
  AudioClip c;
  c.samples.assign(16000, 0.0f);
  REQUIRE(measure_lufs(c) == kSilenceLufs);
  REQUIRE(!std::isfinite(measure_lufs(c)));
}

TEST_CASE("measure_lufs: halving amplitude drops loudness 6.02 dB", "[audio]") {
  AudioClip a = sine(997.0, 0.5, 1.0, 16000);
  AudioClip b = sine(997.0, 0.25, 1.0, 16000);
  REQUIRE(measure_lufs(a) - measure_lufs(b) == Approx(6.0206).margin(0.05));
}

TEST_CASE("measure_lufs: 997 Hz full-scale sine at 48 kHz reads -3.01 LUFS", "[audio]") {
  AudioClip c = sine(997.0, 1.0, 1.0, 48000);
  REQUIRE(measure_lufs(c) == Approx(-3.01).margin(0.1));
}

TEST_CASE("measure_lufs: works on sub-400ms excerpts (ungated path)", "[audio]") {
  AudioClip c = sine(997.0, 0.5, 0.38, 16000);
  REQUIRE(std::isfinite(measure_lufs(c)));
}

TEST_CASE("normalize_lufs: already at target leaves samples unchanged", "[audio]") {
  AudioClip c = sine(440.0, 0.3, 0.7, 16000);
  AudioClip at24 = normalize_lufs(c, -24.0).clip;
  AudioClip again = normalize_lufs(at24, -24.0).clip;
  for (int i = 0; i < at24.length(); ++i)
    REQUIRE(std::abs(again.samples[i] - at24.samples[i]) < 1e-6);
}

TEST_CASE("normalize_lufs: -18 to -24 applies a -6 dB gain", "[audio]") {
  AudioClip c = sine(440.0, 0.3, 0.7, 16000);
  AudioClip at18 = normalize_lufs(c, -18.0).clip;
  NormalizeResult r = normalize_lufs(at18, -24.0);
  REQUIRE(r.gain == Approx(std::pow(10.0, -6.0 / 20.0)).epsilon(0.01));
  REQUIRE(measure_lufs(r.clip) == Approx(-24.0).margin(0.1));
}

TEST_CASE("normalize_lufs: silence is an error", "[audio]") {
  AudioClip c;
  c.samples.assign(8000, 0.0f);
  REQUIRE_THROWS_AS(normalize_lufs(c, -24.0), Error);
}

TEST_CASE("normalize then measure hits the target for random material", "[audio]") {
  Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    AudioClip c;
    if (trial % 2 == 0) {
      c = sine(100.0 + 400.0 * rng.next_double(), 0.05 + 0.4 * rng.next_double(),
               0.5 + rng.next_double(), 16000);
    } else {
      c = noise(0.02 + 0.2 * rng.next_double(), 8000 + (int)rng.below(16000), 16000,
                rng.next_u64());
    }
    const double target = -30.0 + 10.0 * rng.next_double();
    NormalizeResult r = normalize_lufs(c, target);
    if (r.clipped) continue;  // clamping intentionally breaks exactness
    REQUIRE(measure_lufs(r.clip) == Approx(target).margin(0.1));
  }
}

TEST_CASE("normalize_lufs flags clipping when gain exceeds full scale", "[audio]") {
  AudioClip c = sine(440.0, 0.9, 0.5, 16000);
  NormalizeResult r = normalize_lufs(c, 0.0);  // absurdly hot target
  REQUIRE(r.clipped);
  for (float s : r.clip.samples) REQUIRE(std::abs(s) <= 1.0f);
}

TEST_CASE("random_excerpt: exact-length clip returns itself", "[audio]") {
  AudioClip c = noise(0.1, 6080, 16000, 5);
  ExcerptSpec spec;
  Excerpt e = random_excerpt(c, spec, 123);
  REQUIRE(e.clip.length() == 6080);
  REQUIRE(e.offset == 0);
  REQUIRE(e.clip.samples == c.samples);
}

TEST_CASE("random_excerpt: deterministic in the seed", "[audio]") {
  AudioClip c = noise(0.1, 20000, 16000, 6);
  ExcerptSpec spec;
  Excerpt a = random_excerpt(c, spec, 42);
  Excerpt b = random_excerpt(c, spec, 42);
  REQUIRE(a.offset == b.offset);
  REQUIRE(a.clip.samples == b.clip.samples);
  REQUIRE(a.clip.length() == 6080);
}

TEST_CASE("random_excerpt: short clip is zero-padded and flagged", "[audio]") {
  AudioClip c = noise(0.1, 4000, 16000, 7);
  Excerpt e = random_excerpt(c, ExcerptSpec{}, 1);
  REQUIRE(e.padded);
  REQUIRE(e.clip.length() == 6080);
  for (int i = 4000; i < 6080; ++i) REQUIRE(e.clip.samples[i] == 0.0f);
}

TEST_CASE("random_excerpt: offsets are uniform over the valid range", "[audio]") {
  AudioClip c = noise(0.1, 12160, 16000, 8);
  ExcerptSpec spec;
  const int n_bins = 13;
  const int span = 12160 - 6080 + 1;  // offsets 0..6080 inclusive
  std::vector<int> counts(n_bins, 0);
  const int n_seeds = 10000;
  for (int seed = 0; seed < n_seeds; ++seed) {
    Excerpt e = random_excerpt(c, spec, (uint64_t)seed);
    REQUIRE(e.offset >= 0);
    REQUIRE(e.offset < span);
    counts[(int)((int64_t)e.offset * n_bins / span)]++;
  }
  double chi2 = 0.0;
  for (int k = 0; k < n_bins; ++k) {
    const int64_t lo = (int64_t)k * span / n_bins;
    const int64_t hi = (int64_t)(k + 1) * span / n_bins;
    const double expected = double(n_seeds) * double(hi - lo) / span;
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  // chi-square 0.99 quantile at df = 12; below it means p > 0.01
  REQUIRE(chi2 < 26.217);
}

TEST_CASE("pad_to_hop arithmetic", "[audio]") {
  AudioClip a = noise(0.1, 6080, 16000, 9);
  PaddedClip pa = pad_to_hop(a, 320);
  REQUIRE(pa.clip.length() == 6080);
  REQUIRE(pa.pad_samples == 0);

  AudioClip b = noise(0.1, 6000, 16000, 10);
  PaddedClip pb = pad_to_hop(b, 320);
  REQUIRE(pb.clip.length() == 6080);
  REQUIRE(pb.pad_samples == 80);
  for (int i = 0; i < 6000; ++i) REQUIRE(pb.clip.samples[i] == b.samples[i]);
  for (int i = 6000; i < 6080; ++i) REQUIRE(pb.clip.samples[i] == 0.0f);

  AudioClip empty;
  REQUIRE(pad_to_hop(empty, 320).clip.length() == 0);
}

TEST_CASE("pad_to_hop: length is always a multiple and prefix is preserved", "[audio]") {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const int len = (int)rng.below(2000);
    const int hop = 1 + (int)rng.below(500);
    AudioClip c = noise(0.1, len, 16000, rng.next_u64());
    PaddedClip p = pad_to_hop(c, hop);
    REQUIRE(p.clip.length() % hop == 0);
    REQUIRE(p.clip.length() >= len);
    REQUIRE(p.clip.length() - len < hop);
    for (int i = 0; i < len; ++i) REQUIRE(p.clip.samples[i] == c.samples[i]);
  }
}
