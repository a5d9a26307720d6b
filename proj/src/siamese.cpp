#include "decaylab/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace decaylab {

const char* to_string(SearchKind k) { return k == SearchKind::Global ? "global" : "local"; }

std::vector<double> SiameseConfig::default_global_scales() {
  std::vector<double> s;
  for (int k = 0; k <= 10; ++k) s.push_back(std::exp2(-0.4 + 0.08 * k));
  return s;
}

namespace {

Grid make_coarse(const Grid& exemplar, int size) {
  Grid c = resample_grid(exemplar, size, size);
  if (!normalize_zero_mean_unit_norm(c)) throw std::invalid_argument("siamese: coarse exemplar has zero variance");
  return c;
}

struct Candidate {
  double score = -std::numeric_limits<double>::infinity();
  int row = 0;
  int col = 0;
  int scale_index = 0;
  double scale = 1.0;
  SimilarityMap map;

  Box box() const { return map.box_at(row, col); }
};

// Deterministic order: higher score, then smaller (row, col, scale index).
bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.row != b.row) return a.row < b.row;
  if (a.col != b.col) return a.col < b.col;
  return a.scale_index < b.scale_index;
}

Box clamp_size(Box b, const SiameseConfig& cfg, const Frame& f) {
  const double cx = b.cx(), cy = b.cy();
  b.w = std::clamp(b.w, cfg.min_box, static_cast<double>(f.width));
  b.h = std::clamp(b.h, cfg.min_box, static_cast<double>(f.height));
  return Box::from_center(cx, cy, b.w, b.h);
}

// Search around `center` at each of `scales` (relative to base_w/base_h);
// the region is `window` times the candidate size.
Candidate scale_search(const Grid& tmpl, const Frame& f, double cx, double cy, double base_w, double base_h,
                       const std::vector<double>& scales, double window) {
  Candidate best;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double cw = base_w * scales[k], ch = base_h * scales[k];
    const Box region = Box::from_center(cx, cy, cw * window, ch * window);
    if (!clip_box(region, f.width, f.height).present) continue;
    Candidate c;
    c.map = ncc_similarity(tmpl, f, region, cw / tmpl.cols, ch / tmpl.rows);
    c.map.scale = scales[k];
    const MapPeak p = argmax(c.map.values);
    c.score = p.score;
    c.row = p.row;
    c.col = p.col;
    c.scale_index = static_cast<int>(k);
    c.scale = scales[k];
    if (better(c, best)) best = std::move(c);
  }
  return best;
}

Prediction to_prediction(const Candidate& c, SearchKind kind, const SiameseConfig& cfg, const Frame& f) {
  Prediction p;
  p.search_kind = kind;
  p.score = c.score;
  if (c.map.empty()) {
    p.box = Box::absent();
    p.candidate = Box::absent();
    return p;
  }
  p.candidate = clamp_size(c.box(), cfg, f);
  const double threshold = kind == SearchKind::Global ? cfg.redetect_threshold : cfg.absence_threshold;
  p.box = c.score >= threshold ? p.candidate : Box::absent();
  p.map = c.map;
  return p;
}

}  // namespace

SiameseState siamese_init(const Frame& f, const Box& b, const SiameseConfig& cfg) {
  if (!b.present) throw std::invalid_argument("siamese_init: box not present");
  if (!(b.w >= 2.0) || !(b.h >= 2.0)) throw std::invalid_argument("siamese_init: degenerate box");
  const Box clipped = clip_box(b, f.width, f.height);
  if (!clipped.present || clipped.area() < 0.5 * b.area()) throw std::invalid_argument("siamese_init: box outside frame");
  SiameseState s;
  s.config = cfg;
  s.exemplar = sample_patch(f, b, cfg.template_size, cfg.template_size);
  if (!normalize_zero_mean_unit_norm(s.exemplar)) throw std::invalid_argument("siamese_init: zero-variance exemplar");
  s.coarse = make_coarse(s.exemplar, cfg.coarse_size);
  s.last_box = b;
  s.frame_index = 0;
  return s;
}

Prediction local_search(const SiameseState& s, const Frame& f) {
  const Box& lb = s.last_box;
  const Candidate best = scale_search(s.exemplar, f, lb.cx(), lb.cy(), lb.w, lb.h, s.config.fine_scales, s.config.local_window);
  return to_prediction(best, SearchKind::Local, s.config, f);
}

std::vector<MapPeak> top_local_maxima(const Grid& g, int n, int radius) {
  std::vector<MapPeak> cells;
  cells.reserve(g.values.size());
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) cells.push_back({r, c, g.at(r, c)});
  std::stable_sort(cells.begin(), cells.end(), [](const MapPeak& a, const MapPeak& b) { return a.score > b.score; });
  std::vector<char> suppressed(g.values.size(), 0);
  std::vector<MapPeak> out;
  for (const auto& p : cells) {
    if (static_cast<int>(out.size()) >= n) break;
    if (suppressed[static_cast<std::size_t>(p.row) * g.cols + p.col]) continue;
    out.push_back(p);
    for (int r = std::max(0, p.row - radius); r <= std::min(g.rows - 1, p.row + radius); ++r)
      for (int c = std::max(0, p.col - radius); c <= std::min(g.cols - 1, p.col + radius); ++c)
        suppressed[static_cast<std::size_t>(r) * g.cols + c] = 1;
  }
  return out;
}

Prediction global_search(const SiameseState& s, const Frame& f, GlobalSearchTrace* trace) {
  const SiameseConfig& cfg = s.config;
  const double w = s.last_box.w, h = s.last_box.h;

  // Stage 1: whole frame against the coarse exemplar.
  const double sx = w / cfg.coarse_size, sy = h / cfg.coarse_size;
  const Box frame_box = Box::make(0, 0, f.width, f.height);
  if (f.width / sx < cfg.coarse_size || f.height / sy < cfg.coarse_size)
    throw std::invalid_argument("global_search: frame smaller than coarse template");
  SimilarityMap stage1 = ncc_similarity(s.coarse, f, frame_box, sx, sy);
  const std::vector<MapPeak> peaks = top_local_maxima(stage1.values, cfg.candidates, cfg.coarse_size / 2);

  // Stage 2: M global scales around each location, coarse resolution.
  std::vector<Candidate> stage2;
  for (const auto& p : peaks) {
    const Box loc = stage1.box_at(p.row, p.col);
    stage2.push_back(scale_search(s.coarse, f, loc.cx(), loc.cy(), w, h, cfg.global_scales, cfg.stage2_window));
  }

  // Stage 3: L fine scales around each surviving (location, scale), full resolution.
  Candidate best;
  for (const auto& c2 : stage2) {
    if (c2.map.empty()) continue;
    const Box b = c2.box();
    Candidate c3 = scale_search(s.exemplar, f, b.cx(), b.cy(), w * c2.scale, h * c2.scale, cfg.fine_scales, cfg.stage3_window);
    c3.scale *= c2.scale;
    if (!c3.map.empty() && (best.map.empty() || c3.score > best.score)) best = std::move(c3);
  }

  if (trace) {
    trace->stage1 = stage1;
    trace->stage1_candidates.clear();
    trace->stage2_best.clear();
    trace->stage2_scores.clear();
    for (const auto& p : peaks) trace->stage1_candidates.push_back(stage1.box_at(p.row, p.col));
    for (const auto& c : stage2) {
      trace->stage2_best.push_back(c.map.empty() ? Box::absent() : c.box());
      trace->stage2_scores.push_back(c.score);
    }
  }
  return to_prediction(best, SearchKind::Global, cfg, f);
}

Prediction hybrid_step(SiameseState& s, const Frame& f) {
  ++s.frame_index;
  const int T = s.config.global_interval;
  Prediction p = (T > 0 && s.frame_index % T == 0) ? global_search(s, f) : local_search(s, f);
  if (p.box.present) s.last_box = p.box;
  return p;
}

void template_update(SiameseState& s, const Frame& f, const Prediction& p, double alpha, bool permitted) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("template_update: alpha must be in [0, 1]");
  if (!permitted) return;
  if (!p.box.present) throw std::invalid_argument("template_update: prediction not present");
  Grid patch = sample_patch(f, p.box, s.config.template_size, s.config.template_size);
  if (!normalize_zero_mean_unit_norm(patch)) return;
  Grid blended = s.exemplar;
  for (std::size_t i = 0; i < blended.values.size(); ++i)
    blended.values[i] = (1.0 - alpha) * s.exemplar.values[i] + alpha * patch.values[i];
  if (!normalize_zero_mean_unit_norm(blended)) return;
  s.exemplar = std::move(blended);
  s.coarse = make_coarse(s.exemplar, s.config.coarse_size);
}

}  // namespace decaylab
