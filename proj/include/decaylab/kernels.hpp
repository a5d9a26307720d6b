#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference that the
// tests use as the oracle, an OpenMP version, and (for NCC) an FFT version
// used by the trackers on large search regions. bench/ compares them.

#include <span>

#include "decaylab/geom.hpp"

namespace decaylab::kernels {

/// Windows whose summed squared deviation falls at or below this score 0.
inline constexpr double kFlatWindowSS = 1e-10;

/// Normalised cross-correlation of `tmpl` against every placement fully
/// inside `region`. Output is (region.rows - tmpl.rows + 1) x (... cols ...),
/// values in [-1, 1]. Throws if the template is larger than the region or has
/// zero variance.
Grid ncc_map_reference(const Grid& region, const Grid& tmpl);
Grid ncc_map_parallel(const Grid& region, const Grid& tmpl);
Grid ncc_map_fft(const Grid& region, const Grid& tmpl);

/// Dispatches to the FFT path once the direct cost (placements x template
/// area) exceeds a small threshold, otherwise to the OpenMP direct path.
Grid ncc_map(const Grid& region, const Grid& tmpl);

/// Multi-channel tensor, channel-major: values[(c * rows + r) * cols + col].
struct Tensor3 {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Tensor3() = default;
  Tensor3(int ch, int r, int c, double fill = 0.0)
      : channels(ch), rows(r), cols(c), values(static_cast<std::size_t>(ch) * r * c, fill) {}
  double at(int ch, int r, int c) const { return values[(static_cast<std::size_t>(ch) * rows + r) * cols + c]; }
  double& at(int ch, int r, int c) { return values[(static_cast<std::size_t>(ch) * rows + r) * cols + c]; }
};

/// Valid (unpadded, stride 1) bias-free convolution in the cross-correlation
/// sense. weights layout: [out][in][kr][kc].
Tensor3 conv2d_valid_reference(const Tensor3& in, std::span<const double> weights, int out_channels, int k);
Tensor3 conv2d_valid_parallel(const Tensor3& in, std::span<const double> weights, int out_channels, int k);

}  // namespace decaylab::kernels
