#include "decaylab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decaylab/fft.hpp"

namespace decaylab::kernels {

namespace {

Grid checked_normalized_template(const Grid& region, const Grid& tmpl) {
  if (tmpl.rows > region.rows || tmpl.cols > region.cols || tmpl.empty())
    throw std::invalid_argument("ncc: template larger than search region");
  Grid t = tmpl;
  if (!normalize_zero_mean_unit_norm(t)) throw std::invalid_argument("ncc: template has zero variance");
  return t;
}

// Exact two-pass NCC at one placement; t is already zero-mean unit-norm.
double ncc_at(const Grid& region, const Grid& t, int r0, int c0) {
  const double n = static_cast<double>(t.rows) * t.cols;
  double sum = 0.0;
  for (int a = 0; a < t.rows; ++a)
    for (int b = 0; b < t.cols; ++b) sum += region.at(r0 + a, c0 + b);
  const double mean = sum / n;
  double ss = 0.0;
  double dot = 0.0;
  for (int a = 0; a < t.rows; ++a) {
    for (int b = 0; b < t.cols; ++b) {
      const double d = region.at(r0 + a, c0 + b) - mean;
      ss += d * d;
      dot += d * t.at(a, b);
    }
  }
  if (ss <= kFlatWindowSS) return 0.0;
  return std::clamp(dot / std::sqrt(ss), -1.0, 1.0);
}

}  // namespace

Grid ncc_map_reference(const Grid& region, const Grid& tmpl) {
  const Grid t = checked_normalized_template(region, tmpl);
  Grid out(region.rows - t.rows + 1, region.cols - t.cols + 1);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = ncc_at(region, t, r, c);
  return out;
}

Grid ncc_map_parallel(const Grid& region, const Grid& tmpl) {
  const Grid t = checked_normalized_template(region, tmpl);
  Grid out(region.rows - t.rows + 1, region.cols - t.cols + 1);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = ncc_at(region, t, r, c);
  return out;
}

Grid ncc_map_fft(const Grid& region, const Grid& tmpl) {
  const Grid t = checked_normalized_template(region, tmpl);
  // Centre the region so the integral images stay well conditioned.
  double gmean = 0.0;
  for (double v : region.values) gmean += v;
  gmean /= static_cast<double>(region.values.size());
  Grid centred = region;
  for (double& v : centred.values) v -= gmean;

  const Grid dot = fft::correlate_valid(centred, t);

  const int R = region.rows, C = region.cols;
  std::vector<long double> s1(static_cast<std::size_t>(R + 1) * (C + 1), 0.0L);
  std::vector<long double> s2(s1.size(), 0.0L);
  auto idx = [C](int r, int c) { return static_cast<std::size_t>(r) * (C + 1) + c; };
  for (int r = 0; r < R; ++r) {
    long double row1 = 0.0L, row2 = 0.0L;
    for (int c = 0; c < C; ++c) {
      const long double v = centred.at(r, c);
      row1 += v;
      row2 += v * v;
      s1[idx(r + 1, c + 1)] = s1[idx(r, c + 1)] + row1;
      s2[idx(r + 1, c + 1)] = s2[idx(r, c + 1)] + row2;
    }
  }
  const long double n = static_cast<long double>(t.rows) * t.cols;
  Grid out(dot.rows, dot.cols);
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      const int r1 = r + t.rows, c1 = c + t.cols;
      const long double a = s1[idx(r1, c1)] - s1[idx(r, c1)] - s1[idx(r1, c)] + s1[idx(r, c)];
      const long double b = s2[idx(r1, c1)] - s2[idx(r, c1)] - s2[idx(r1, c)] + s2[idx(r, c)];
      const double ss = static_cast<double>(b - a * a / n);
      out.at(r, c) = ss <= kFlatWindowSS ? 0.0 : std::clamp(dot.at(r, c) / std::sqrt(ss), -1.0, 1.0);
    }
  }
  return out;
}

Grid ncc_map(const Grid& region, const Grid& tmpl) {
  const double placements = static_cast<double>(region.rows - tmpl.rows + 1) * (region.cols - tmpl.cols + 1);
  const double direct_cost = placements * tmpl.rows * tmpl.cols;
  if (direct_cost < 2.0e5) return ncc_map_parallel(region, tmpl);
  return ncc_map_fft(region, tmpl);
}

namespace {

void check_conv(const Tensor3& in, std::span<const double> weights, int out_channels, int k) {
  if (k <= 0 || in.rows < k || in.cols < k) throw std::invalid_argument("conv2d: input smaller than kernel");
  if (weights.size() != static_cast<std::size_t>(out_channels) * in.channels * k * k)
    throw std::invalid_argument("conv2d: weight count does not match shape");
}

inline double conv_at(const Tensor3& in, std::span<const double> w, int o, int r, int c, int k) {
  double acc = 0.0;
  for (int i = 0; i < in.channels; ++i) {
    const double* wk = w.data() + (static_cast<std::size_t>(o) * in.channels + i) * k * k;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) acc += wk[a * k + b] * in.at(i, r + a, c + b);
  }
  return acc;
}

}  // namespace

Tensor3 conv2d_valid_reference(const Tensor3& in, std::span<const double> weights, int out_channels, int k) {
  check_conv(in, weights, out_channels, k);
  Tensor3 out(out_channels, in.rows - k + 1, in.cols - k + 1);
  for (int o = 0; o < out_channels; ++o)
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out.at(o, r, c) = conv_at(in, weights, o, r, c, k);
  return out;
}

Tensor3 conv2d_valid_parallel(const Tensor3& in, std::span<const double> weights, int out_channels, int k) {
  check_conv(in, weights, out_channels, k);
  Tensor3 out(out_channels, in.rows - k + 1, in.cols - k + 1);
#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < out_channels; ++o)
    for (int r = 0; r < out.rows; ++r)
      for (int c = 0; c < out.cols; ++c) out.at(o, r, c) = conv_at(in, weights, o, r, c, k);
  return out;
}

}  // namespace decaylab::kernels
