#include <doctest.h>

#include "decaylab/fft.hpp"
#include "decaylab/kernels.hpp"
#include "decaylab/rng.hpp"
#include "oracles.hpp"

using namespace decaylab;

namespace {

double max_abs_diff(const Grid& a, const Grid& b) {
  REQUIRE(a.rows == b.rows);
  REQUIRE(a.cols == b.cols);
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("NCC reference matches the brute-force oracle on random 8x8 / 3x3") {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid region = oracle::random_grid(8, 8, rng);
    const Grid tmpl = oracle::random_grid(3, 3, rng);
    const Grid expect = oracle::ncc(region, tmpl);
    CHECK(max_abs_diff(kernels::ncc_map_reference(region, tmpl), expect) < 1e-10);
    CHECK(max_abs_diff(kernels::ncc_map_parallel(region, tmpl), expect) < 1e-10);
    CHECK(max_abs_diff(kernels::ncc_map_fft(region, tmpl), expect) < 1e-8);
  }
}

TEST_CASE("NCC variants agree on larger non-square instances") {
  SplitMix64 rng(2);
  for (auto [rr, rc, tr, tc] : {std::array{40, 57, 9, 13}, std::array{64, 64, 32, 32}, std::array{33, 20, 33, 7}}) {
    const Grid region = oracle::random_grid(rr, rc, rng);
    const Grid tmpl = oracle::random_grid(tr, tc, rng);
    const Grid ref = kernels::ncc_map_reference(region, tmpl);
    CHECK(max_abs_diff(kernels::ncc_map_parallel(region, tmpl), ref) == 0.0);
    CHECK(max_abs_diff(kernels::ncc_map_fft(region, tmpl), ref) < 1e-8);
    CHECK(max_abs_diff(kernels::ncc_map(region, tmpl), ref) < 1e-8);
    CHECK(max_abs_diff(oracle::ncc(region, tmpl), ref) < 1e-10);
  }
}

TEST_CASE("NCC of an embedded copy is 1, of its negation -1") {
  SplitMix64 rng(3);
  Grid region = oracle::random_grid(20, 20, rng);
  const Grid tmpl = oracle::random_grid(5, 5, rng);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) region.at(7 + a, 11 + b) = tmpl.at(a, b);
  Grid neg = tmpl;
  for (double& v : neg.values) v = 1.0 - v;
  for (auto fn : {kernels::ncc_map_reference, kernels::ncc_map_parallel, kernels::ncc_map_fft}) {
    const Grid m = fn(region, tmpl);
    CHECK(m.at(7, 11) == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : m.values) CHECK(v <= 1.0 + 1e-12);
    const Grid n = fn(region, neg);
    CHECK(n.at(7, 11) == doctest::Approx(-1.0).epsilon(1e-10));
    for (double v : n.values) CHECK(v >= -1.0 - 1e-12);
  }
}

TEST_CASE("flat windows score 0; degenerate inputs throw") {
  Grid region(10, 10, 0.5);
  SplitMix64 rng(4);
  for (int r = 0; r < 10; ++r)
    for (int c = 5; c < 10; ++c) region.at(r, c) = rng.uniform();
  const Grid tmpl = oracle::random_grid(3, 3, rng);
  for (auto fn : {kernels::ncc_map_reference, kernels::ncc_map_parallel, kernels::ncc_map_fft}) {
    const Grid m = fn(region, tmpl);
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c <= 2; ++c) CHECK(m.at(r, c) == 0.0);
    CHECK_THROWS_AS(fn(region, Grid(3, 3, 0.2)), std::invalid_argument);
    CHECK_THROWS_AS(fn(tmpl, region), std::invalid_argument);
  }
}

TEST_CASE("valid correlation via FFT equals direct sums") {
  SplitMix64 rng(5);
  const Grid g = oracle::random_grid(11, 9, rng);
  const Grid k = oracle::random_grid(4, 3, rng);
  const Grid c = fft::correlate_valid(g, k);
  REQUIRE(c.rows == 8);
  REQUIRE(c.cols == 7);
  for (int r = 0; r < 8; ++r)
    for (int col = 0; col < 7; ++col) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 3; ++b) s += k.at(a, b) * g.at(r + a, col + b);
      CHECK(c.at(r, col) == doctest::Approx(s).epsilon(1e-10));
    }
}

TEST_CASE("FFT forward/inverse round trip and naive DFT agreement") {
  SplitMix64 rng(6);
  const Grid g = oracle::random_grid(6, 5, rng);
  const auto spec = fft::forward(g);
  const auto naive = oracle::dft2(oracle::to_complex(g), 6, 5, -1);
  for (int u = 0; u < 6; ++u)
    for (int v = 0; v < spec.bin_cols(); ++v) CHECK(std::abs(spec.bins[u * spec.bin_cols() + v] - naive[u * 5 + v]) < 1e-10);
  CHECK(max_abs_diff(fft::inverse(spec), g) < 1e-12);
}

TEST_CASE("convolution kernels match the direct oracle") {
  SplitMix64 rng(7);
  for (auto [in_ch, out_ch, rows, cols, k] : {std::array{1, 8, 5, 5, 3}, std::array{8, 16, 12, 10, 3}, std::array{2, 3, 6, 7, 2}}) {
    kernels::Tensor3 in(in_ch, rows, cols);
    for (double& v : in.values) v = rng.normal();
    std::vector<double> w(static_cast<std::size_t>(out_ch) * in_ch * k * k);
    for (double& v : w) v = rng.normal();
    const auto expect = oracle::conv(in.values, in_ch, rows, cols, w, out_ch, k);
    const auto ref = kernels::conv2d_valid_reference(in, w, out_ch, k);
    const auto par = kernels::conv2d_valid_parallel(in, w, out_ch, k);
    REQUIRE(ref.values.size() == expect.size());
    CHECK(ref.channels == out_ch);
    CHECK(ref.rows == rows - k + 1);
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(std::abs(ref.values[i] - expect[i]) < 1e-10);
      CHECK(par.values[i] == ref.values[i]);
    }
  }
}
