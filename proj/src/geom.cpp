#include "decaylab/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decaylab {

double iou(const Box& a, const Box& b) {
  if (!a.present || !b.present) throw std::invalid_argument("iou: box not present");
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  // Extents measured the same way as the intersection so iou(a, a) == 1 exactly.
  const double area_a = ((a.x + a.w) - a.x) * ((a.y + a.h) - a.y);
  const double area_b = ((b.x + b.w) - b.x) * ((b.y + b.h) - b.y);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box clip_box(const Box& b, int width, int height) {
  if (!b.present) throw std::invalid_argument("clip_box: box not present");
  const double x0 = std::max(b.x, 0.0);
  const double y0 = std::max(b.y, 0.0);
  const double x1 = std::min(b.x + b.w, static_cast<double>(width));
  const double y1 = std::min(b.y + b.h, static_cast<double>(height));
  if (x1 <= x0 || y1 <= y0) return Box::absent();
  return Box::make(x0, y0, x1 - x0, y1 - y0);
}

namespace {

template <typename Read>
double bilinear(Read&& read, double sx, double sy) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = sx - fx0;
  const double ay = sy - fy0;
  const double v00 = read(y0, x0);
  const double v01 = read(y0, x0 + 1);
  const double v10 = read(y0 + 1, x0);
  const double v11 = read(y0 + 1, x0 + 1);
  return (1.0 - ay) * ((1.0 - ax) * v00 + ax * v01) + ay * ((1.0 - ax) * v10 + ax * v11);
}

}  // namespace

Grid sample_patch(const Frame& f, const Box& b, int out_w, int out_h) {
  if (!b.present) throw std::invalid_argument("extract_patch: box not present");
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("extract_patch: output size must be positive");
  Grid out(out_h, out_w);
  const double step_x = b.w / out_w;
  const double step_y = b.h / out_h;
  auto read = [&f](int r, int c) -> double {
    if (r < 0 || c < 0 || r >= f.height || c >= f.width) return 0.0;
    return f.at(r, c);
  };
  for (int r = 0; r < out_h; ++r) {
    const double sy = b.y + (r + 0.5) * step_y - 0.5;
    for (int c = 0; c < out_w; ++c) {
      const double sx = b.x + (c + 0.5) * step_x - 0.5;
      out.at(r, c) = bilinear(read, sx, sy);
    }
  }
  return out;
}

Frame extract_patch(const Frame& f, const Box& b, int out_w, int out_h) {
  return to_frame(sample_patch(f, b, out_w, out_h));
}

Grid resample_grid(const Grid& g, int out_rows, int out_cols) {
  if (out_rows <= 0 || out_cols <= 0) throw std::invalid_argument("resample_grid: output size must be positive");
  Grid out(out_rows, out_cols);
  const double step_x = static_cast<double>(g.cols) / out_cols;
  const double step_y = static_cast<double>(g.rows) / out_rows;
  auto read = [&g](int r, int c) -> double {
    if (r < 0 || c < 0 || r >= g.rows || c >= g.cols) return 0.0;
    return g.at(r, c);
  };
  for (int r = 0; r < out_rows; ++r) {
    const double sy = (r + 0.5) * step_y - 0.5;
    for (int c = 0; c < out_cols; ++c) {
      out.at(r, c) = bilinear(read, (c + 0.5) * step_x - 0.5, sy);
    }
  }
  return out;
}

Grid to_grid(const Frame& f) {
  Grid g(f.height, f.width);
  std::copy(f.pixels.begin(), f.pixels.end(), g.values.begin());
  return g;
}

Frame to_frame(const Grid& g) {
  Frame f(g.cols, g.rows);
  std::transform(g.values.begin(), g.values.end(), f.pixels.begin(), [](double v) { return static_cast<float>(v); });
  return f;
}

bool normalize_zero_mean_unit_norm(Grid& g) {
  if (g.values.empty()) return false;
  double mean = 0.0;
  for (double v : g.values) mean += v;
  mean /= static_cast<double>(g.values.size());
  double ss = 0.0;
  for (double v : g.values) ss += (v - mean) * (v - mean);
  if (!(ss > 1e-12)) return false;
  const double inv = 1.0 / std::sqrt(ss);
  for (double& v : g.values) v = (v - mean) * inv;
  return true;
}

}  // namespace decaylab
