#include <catch_amalgamated.hpp>

#include "semdac/teacher/teacher.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace semdac;
using namespace testutil;

TEST_CASE("SEMF round trip is bit-exact", "[teacher]") {
  Rng rng(1);
  TeacherFeatures f;
  f.values.resize(24, 37);
  for (int d = 0; d < 24; ++d)
    for (int t = 0; t < 37; ++t) f.values(d, t) = (float)rng.normal() * 3.7f;
  const auto path = temp_path("teacher.semf");
  save_teacher_features(path, f);
  TeacherFeatures back = load_teacher_features(path, 0, 37);
  REQUIRE(back.teacher_dim() == 24);
  REQUIRE(back.n_frames() == 37);
  REQUIRE(back.values == f.values);  // exact float equality

  SemfInfo info = semf_info(path);
  REQUIRE(info.teacher_dim == 24);
  REQUIRE(info.n_frames == 37);
}

TEST_CASE("SEMF slicing returns the requested frame window", "[teacher]") {
  TeacherFeatures f;
  f.values.resize(4, 8);
  for (int t = 0; t < 8; ++t) f.values.col(t).setConstant((float)t);
  const auto path = temp_path("teacher_slice.semf");
  save_teacher_features(path, f);
  TeacherFeatures sl = load_teacher_features(path, 2, 1);
  REQUIRE(sl.n_frames() == 1);
  for (int d = 0; d < 4; ++d) REQUIRE(sl.values(d, 0) == 2.0f);

  REQUIRE_THROWS_AS(load_teacher_features(path, 7, 2), Error);  // out of bounds
  try {
    load_teacher_features(path, 0, 9);
    FAIL("expected range error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == Err::range);
  }
}

TEST_CASE("SEMF magic and version are enforced", "[teacher]") {
  const auto path = temp_path("bad.semf");
  {
    std::ofstream f(path, std::ios::binary);
    f << "SMEF\x01rubbish and more rubbish";
  }
  try {
    load_teacher_features(path, 0, 1);
    FAIL("expected format error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == Err::format);
  }
}

TEST_CASE("mock teacher is a pure function of its arguments", "[teacher]") {
  TeacherFeatures a = mock_teacher(123, 19, 32);
  TeacherFeatures b = mock_teacher(123, 19, 32);
  REQUIRE(a.values == b.values);
  REQUIRE(a.teacher_dim() == 32);
  REQUIRE(a.n_frames() == 19);

  TeacherFeatures empty = mock_teacher(5, 0, 32);
  REQUIRE(empty.n_frames() == 0);
}

TEST_CASE("mock teacher windows are consistent with absolute frames", "[teacher]") {
  TeacherFeatures all = mock_teacher_window(9, 0, 10, 8);
  TeacherFeatures tail = mock_teacher_window(9, 6, 4, 8);
  for (int t = 0; t < 4; ++t)
    for (int d = 0; d < 8; ++d) REQUIRE(tail.values(d, t) == all.values(d, 6 + t));
}

TEST_CASE("different clip hashes give almost entirely different features", "[teacher]") {
  int differing = 0, total = 0;
  for (uint64_t h = 0; h < 1000; ++h) {
    TeacherFeatures a = mock_teacher(h, 1, 4);
    TeacherFeatures b = mock_teacher(h + 1, 1, 4);
    for (int d = 0; d < 4; ++d) {
      ++total;
      if (a.values(d, 0) != b.values(d, 0)) ++differing;
    }
  }
  REQUIRE(double(differing) / total >= 0.99);
}

TEST_CASE("align_frames: identity, nearest-map shrink, out-of-tolerance", "[teacher]") {
  TeacherFeatures f;
  f.values.resize(3, 20);
  for (int t = 0; t < 20; ++t) f.values.col(t).setConstant((float)t);

  TeacherFeatures same = align_frames(f, 20);
  REQUIRE(same.values == f.values);

  TeacherFeatures shrunk = align_frames(f, 19);
  REQUIRE(shrunk.n_frames() == 19);
  REQUIRE(shrunk.values(0, 0) == 0.0f);  // first frame preserved
  for (int t = 0; t < 19; ++t) {
    const int expected = std::min(19, (int)std::floor((t + 0.5) * 20.0 / 19.0));
    REQUIRE(shrunk.values(0, t) == (float)expected);
  }

  TeacherFeatures grown = align_frames(shrunk, 20);
  REQUIRE(grown.n_frames() == 20);

  TeacherFeatures big;
  big.values.resize(3, 25);
  big.values.setZero();
  try {
    align_frames(big, 19);
    FAIL("expected alignment error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == Err::align);
  }
}

TEST_CASE("align_frames is idempotent once counts match", "[teacher]") {
  Rng rng(4);
  TeacherFeatures f;
  f.values.resize(5, 21);
  for (int d = 0; d < 5; ++d)
    for (int t = 0; t < 21; ++t) f.values(d, t) = (float)rng.normal();
  TeacherFeatures once = align_frames(f, 19);
  TeacherFeatures twice = align_frames(once, 19);
  REQUIRE(once.values == twice.values);
}
