#include <doctest.h>

#include "decaylab/geom.hpp"
#include "decaylab/pgm.hpp"
#include "decaylab/rng.hpp"
#include "oracles.hpp"

#include <filesystem>

using namespace decaylab;

TEST_CASE("iou of hand-sized boxes") {
  CHECK(iou(Box::make(0, 0, 2, 2), Box::make(0, 0, 2, 2)) == 1.0);
  CHECK(iou(Box::make(0, 0, 1, 1), Box::make(5, 5, 1, 1)) == 0.0);
  CHECK(iou(Box::make(0, 0, 2, 2), Box::make(1, 1, 2, 2)) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK_THROWS_AS(iou(Box::absent(), Box::make(0, 0, 1, 1)), std::invalid_argument);
}

TEST_CASE("iou properties over random boxes") {
  SplitMix64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    const Box a = Box::make(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.1, 8), rng.uniform(0.1, 8));
    const Box b = Box::make(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.1, 8), rng.uniform(0.1, 8));
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v == doctest::Approx(oracle::iou(a.x, a.y, a.w, a.h, b.x, b.y, b.w, b.h)).epsilon(1e-12));
  }
}

TEST_CASE("clip_box") {
  CHECK(clip_box(Box::make(-1, -1, 3, 3), 10, 10) == Box::make(0, 0, 2, 2));
  CHECK(clip_box(Box::make(2, 2, 3, 3), 10, 10) == Box::make(2, 2, 3, 3));
  CHECK_FALSE(clip_box(Box::make(20, 20, 3, 3), 10, 10).present);
}

TEST_CASE("extract_patch identity and constancy") {
  SplitMix64 rng(1);
  Frame f(7, 5);
  for (float& p : f.pixels) p = static_cast<float>(rng.uniform());
  const Frame copy = extract_patch(f, Box::make(0, 0, 7, 5), 7, 5);
  CHECK(copy == f);

  Frame flat(20, 20, 0.375f);
  const Frame p = extract_patch(flat, Box::make(3.3, 4.1, 9.7, 5.2), 6, 11);
  for (float v : p.pixels) CHECK(v == doctest::Approx(0.375).epsilon(1e-6));
}

TEST_CASE("bilinear upsampling of a 2x2 checkerboard matches hand weights") {
  // Sample positions along each axis are -0.25, 0.25, 0.75, 1.25 with zero
  // padding outside, giving 1-D weights (over pixels 0 and 1):
  //   [.75 0], [.75 .25], [.25 .75], [0 .75]
  Frame f(2, 2);
  f.at(0, 0) = 0.f;
  f.at(0, 1) = 1.f;
  f.at(1, 0) = 1.f;
  f.at(1, 1) = 0.f;
  const double expected[4][4] = {{0.0, 0.1875, 0.5625, 0.5625},
                                 {0.1875, 0.375, 0.625, 0.5625},
                                 {0.5625, 0.625, 0.375, 0.1875},
                                 {0.5625, 0.5625, 0.1875, 0.0}};
  const Grid g = sample_patch(f, Box::make(0, 0, 2, 2), 4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(g.at(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-12));
}

TEST_CASE("extract_patch is intensity-linear") {
  SplitMix64 rng(9);
  Frame f(16, 12);
  for (float& p : f.pixels) p = static_cast<float>(rng.uniform());
  const double alpha = 0.5;
  Frame scaled = f;
  for (float& p : scaled.pixels) p = static_cast<float>(alpha * p);
  const Box b = Box::make(-2.5, 1.25, 14.0, 9.5);
  const Grid a = sample_patch(f, b, 9, 7);
  const Grid s = sample_patch(scaled, b, 9, 7);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(s.values[i] == doctest::Approx(alpha * a.values[i]).epsilon(1e-6));
}

TEST_CASE("zero-mean unit-norm normalisation") {
  Grid g(2, 2);
  g.values = {1, 2, 3, 4};
  REQUIRE(normalize_zero_mean_unit_norm(g));
  double s = 0, ss = 0;
  for (double v : g.values) {
    s += v;
    ss += v * v;
  }
  CHECK(std::abs(s) < 1e-15);
  CHECK(ss == doctest::Approx(1.0));
  Grid flat(3, 3, 0.5);
  CHECK_FALSE(normalize_zero_mean_unit_norm(flat));
}

TEST_CASE("pgm round trip after 8-bit quantisation") {
  SplitMix64 rng(5);
  Frame f(13, 9);
  for (float& p : f.pixels) p = static_cast<float>(rng.uniform());
  quantize_8bit(f);
  const auto path = std::filesystem::temp_directory_path() / "decaylab_test_geom.pgm";
  write_pgm(f, path);
  CHECK(read_pgm(path) == f);
  std::filesystem::remove(path);
}
