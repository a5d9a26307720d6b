#pragma once

#include <complex>
#include <vector>

#include "decaylab/geom.hpp"

namespace decaylab::fft {

/// Half spectrum of a real rows x cols signal: rows x (cols / 2 + 1) bins.
struct Spectrum {
  int rows = 0;
  int cols = 0;  // spatial width; bin width is cols / 2 + 1
  std::vector<std::complex<double>> bins;

  int bin_cols() const { return cols / 2 + 1; }
};

Spectrum forward(const Grid& g);
/// Inverse including the 1 / (rows * cols) normalisation.
Grid inverse(const Spectrum& s);

/// c(i, j) = sum_{a,b} k(a, b) * g(i + a, j + b) over all placements with the
/// kernel fully inside g. Output is (g.rows - k.rows + 1) x (g.cols - k.cols + 1).
Grid correlate_valid(const Grid& g, const Grid& k);

}  // namespace decaylab::fft
