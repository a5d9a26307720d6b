#pragma once

#include <span>
#include <vector>

namespace decaylab {

/// Axis-aligned box in continuous pixel coordinates, corner form.
/// An absent box (present == false) is canonically all zeros.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool present = false;

  static Box make(double x, double y, double w, double h) { return {x, y, w, h, true}; }
  static Box absent() { return {}; }
  static Box from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h, true};
  }

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return present ? w * h : 0.0; }

  bool operator==(const Box&) const = default;
};

/// Grayscale frame, row-major, intensities in [0, 1].
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  Frame() = default;
  Frame(int w, int h, float fill = 0.0f) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  float at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }

  bool operator==(const Frame&) const = default;
};

/// Double-precision 2-D grid, row-major. Used for templates, search regions
/// and similarity maps where the float storage of frames is not enough.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  bool empty() const { return values.empty(); }

  bool operator==(const Grid&) const = default;
};

/// Intersection over union of two present boxes. Throws std::invalid_argument
/// for an absent box; absence is an evaluation concern, not a geometric one.
double iou(const Box& a, const Box& b);

/// Intersection with [0, width) x [0, height); absent if empty.
Box clip_box(const Box& b, int width, int height);

/// Bilinear resample of region `b` into an out_w x out_h grid. Output pixel
/// (r, c) samples the source at
///   sx = b.x + (c + 0.5) * b.w / out_w - 0.5,  sy likewise,
/// with source pixel k centred on k. Reads outside the frame return 0.
Grid sample_patch(const Frame& f, const Box& b, int out_w, int out_h);
Frame extract_patch(const Frame& f, const Box& b, int out_w, int out_h);

/// Same sampling rule applied to a grid treated as an image.
Grid resample_grid(const Grid& g, int out_rows, int out_cols);

Grid to_grid(const Frame& f);
Frame to_frame(const Grid& g);

/// Zero mean, unit L2 norm. Returns false (and leaves g untouched) when the
/// grid has no variance to normalise.
bool normalize_zero_mean_unit_norm(Grid& g);

}  // namespace decaylab
