#pragma once

#include <limits>

#include "decaylab/geom.hpp"

namespace decaylab {

/// Grid of template-match scores. Cell (r, c) corresponds to the candidate
/// box whose top-left is origin + (c * stride_x, r * stride_y) and whose size
/// is (cand_w, cand_h).
struct SimilarityMap {
  Grid values;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double stride_x = 1.0;
  double stride_y = 1.0;
  double cand_w = 0.0;
  double cand_h = 0.0;
  double scale = 1.0;  // relative scale of this search

  Box box_at(int r, int c) const { return Box::make(origin_x + c * stride_x, origin_y + r * stride_y, cand_w, cand_h); }
  bool empty() const { return values.empty(); }
};

struct MapPeak {
  int row = -1;
  int col = -1;
  double score = -std::numeric_limits<double>::infinity();
};

/// Maximum with ties broken toward the smallest (row, col).
MapPeak argmax(const Grid& g);

/// NCC of `tmpl` against every placement inside `region`, where one template
/// pixel spans (scale_x, scale_y) frame pixels. The region is resampled at
/// that pitch; reads outside the frame are 0. Throws std::invalid_argument if
/// the region is absent or smaller than the scaled template.
SimilarityMap ncc_similarity(const Grid& tmpl, const Frame& f, const Box& region, double scale_x, double scale_y);
inline SimilarityMap ncc_similarity(const Grid& tmpl, const Frame& f, const Box& region, double scale) {
  return ncc_similarity(tmpl, f, region, scale, scale);
}

}  // namespace decaylab
