#include "decaylab/mosse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace decaylab {

namespace {

Grid hann(int rows, int cols) {
  Grid w(rows, cols);
  auto h1 = [](int i, int n) { return n <= 1 ? 1.0 : 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1)); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) w.at(r, c) = h1(r, rows) * h1(c, cols);
  return w;
}

Box window_box(const MosseState& s, const Box& around) {
  return Box::from_center(around.cx(), around.cy(), s.window_w, s.window_h);
}

// Element-wise accumulate: acc = (1 - rate) acc + rate * G . conj(F) (or F . conj(F)).
void blend(fft::Spectrum& acc, const fft::Spectrum& fresh, double rate) {
  for (std::size_t i = 0; i < acc.bins.size(); ++i) acc.bins[i] = (1.0 - rate) * acc.bins[i] + rate * fresh.bins[i];
}

std::pair<fft::Spectrum, fft::Spectrum> training_terms(const MosseState& s, const fft::Spectrum& F) {
  fft::Spectrum a = F, b = F;
  for (std::size_t i = 0; i < F.bins.size(); ++i) {
    a.bins[i] = s.target.bins[i] * std::conj(F.bins[i]);
    b.bins[i] = F.bins[i] * std::conj(F.bins[i]);
  }
  return {a, b};
}

}  // namespace

bool mosse_preprocess(Grid& patch, const Grid& window) {
  for (double& v : patch.values) v = std::log1p(std::max(v, 0.0));
  if (!normalize_zero_mean_unit_norm(patch)) return false;
  for (std::size_t i = 0; i < patch.values.size(); ++i) patch.values[i] *= window.values[i];
  return true;
}

MosseState mosse_init(const Frame& f, const Box& b, const MosseConfig& cfg) {
  if (!b.present || !(b.w >= 2.0) || !(b.h >= 2.0)) throw std::invalid_argument("mosse_init: box absent or degenerate");
  MosseState s;
  s.config = cfg;
  s.window_w = std::max(4, static_cast<int>(std::lround(cfg.padding * b.w)));
  s.window_h = std::max(4, static_cast<int>(std::lround(cfg.padding * b.h)));
  s.window = hann(s.window_h, s.window_w);
  s.last_box = b;

  Grid g(s.window_h, s.window_w);
  const double sigma = cfg.sigma_factor * b.w;
  const int cy = s.window_h / 2, cx = s.window_w / 2;
  for (int r = 0; r < s.window_h; ++r)
    for (int c = 0; c < s.window_w; ++c)
      g.at(r, c) = std::exp(-((r - cy) * (r - cy) + (c - cx) * (c - cx)) / (2.0 * sigma * sigma));
  s.target = fft::forward(g);

  Grid patch = sample_patch(f, window_box(s, b), s.window_w, s.window_h);
  if (!mosse_preprocess(patch, s.window)) throw std::invalid_argument("mosse_init: zero-energy patch");
  auto [a, bb] = training_terms(s, fft::forward(patch));
  s.num = std::move(a);
  s.den = std::move(bb);
  return s;
}

Grid mosse_response(const MosseState& s, const Grid& preprocessed) {
  fft::Spectrum z = fft::forward(preprocessed);
  for (std::size_t i = 0; i < z.bins.size(); ++i) z.bins[i] *= s.num.bins[i] / (s.den.bins[i] + s.config.lambda);
  return fft::inverse(z);
}

Prediction mosse_step(MosseState& s, const Frame& f) {
  Grid patch = sample_patch(f, window_box(s, s.last_box), s.window_w, s.window_h);
  Prediction p;
  p.search_kind = SearchKind::Local;
  if (!mosse_preprocess(patch, s.window)) {
    // Featureless window: hold position, skip the update.
    p.box = s.last_box;
    p.candidate = s.last_box;
    p.score = 0.0;
    return p;
  }
  const Grid response = mosse_response(s, patch);
  const MapPeak peak = argmax(response);
  const double dx = peak.col - s.window_w / 2;
  const double dy = peak.row - s.window_h / 2;
  const Box moved = Box::from_center(s.last_box.cx() + dx, s.last_box.cy() + dy, s.last_box.w, s.last_box.h);

  p.box = moved;
  p.candidate = moved;
  p.score = peak.score;
  p.map.values = response;
  p.map.origin_x = s.last_box.x - s.window_w / 2;
  p.map.origin_y = s.last_box.y - s.window_h / 2;
  p.map.cand_w = s.last_box.w;
  p.map.cand_h = s.last_box.h;

  Grid fresh = sample_patch(f, window_box(s, moved), s.window_w, s.window_h);
  if (mosse_preprocess(fresh, s.window)) {
    auto [a, b] = training_terms(s, fft::forward(fresh));
    blend(s.num, a, s.config.beta);
    blend(s.den, b, s.config.beta);
  }
  s.last_box = moved;
  return p;
}

}  // namespace decaylab
