#pragma once

// MOSSE correlation filter (Bolme et al. 2010): a per-frame-updating tracker.
//   H* = A / (B + lambda),  A = G . conj(F),  B = F . conj(F)
// with A and B running averages at rate beta. Detection is the inverse FFT
// of Z . H*, i.e. circular cross-correlation of the patch with the filter.

#include "decaylab/fft.hpp"
#include "decaylab/geom.hpp"
#include "decaylab/siamese.hpp"

namespace decaylab {

struct MosseConfig {
  double lambda = 1e-2;
  double beta = 0.125;
  double sigma_factor = 0.1;  // Gaussian response sigma = sigma_factor * box width
  double padding = 2.0;       // window = padding * box, native resolution
};

struct MosseState {
  fft::Spectrum num;  // A
  fft::Spectrum den;  // B
  fft::Spectrum target;  // G
  Grid window;  // Hann taper
  int window_w = 0;
  int window_h = 0;
  Box last_box;
  MosseConfig config;
};

/// log1p, zero mean, unit norm, Hann taper. Returns false on a zero-energy patch.
bool mosse_preprocess(Grid& patch, const Grid& window);

/// Throws std::invalid_argument on an absent box or a zero-energy patch.
MosseState mosse_init(const Frame& f, const Box& b, const MosseConfig& cfg = {});

/// Detect, move, then update the accumulators (always, at rate beta).
Prediction mosse_step(MosseState& s, const Frame& f);

/// Correlation response of a preprocessed window-sized patch.
Grid mosse_response(const MosseState& s, const Grid& preprocessed);

}  // namespace decaylab
