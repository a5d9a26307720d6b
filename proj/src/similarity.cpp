#include "decaylab/similarity.hpp"

#include <cmath>
#include <stdexcept>

#include "decaylab/kernels.hpp"

namespace decaylab {

MapPeak argmax(const Grid& g) {
  MapPeak p;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      if (g.at(r, c) > p.score) p = {r, c, g.at(r, c)};
  return p;
}

SimilarityMap ncc_similarity(const Grid& tmpl, const Frame& f, const Box& region, double scale_x, double scale_y) {
  if (!region.present) throw std::invalid_argument("ncc_similarity: region not present");
  if (!(scale_x > 0.0) || !(scale_y > 0.0)) throw std::invalid_argument("ncc_similarity: scale must be positive");
  // Nudge before truncating so exact multiples survive rounding noise.
  const int cols = static_cast<int>(std::floor(region.w / scale_x + 1e-9));
  const int rows = static_cast<int>(std::floor(region.h / scale_y + 1e-9));
  if (rows < tmpl.rows || cols < tmpl.cols) throw std::invalid_argument("ncc_similarity: region smaller than scaled template");
  const Box sampled = Box::make(region.x, region.y, cols * scale_x, rows * scale_y);
  const Grid patch = sample_patch(f, sampled, cols, rows);

  SimilarityMap m;
  m.values = kernels::ncc_map(patch, tmpl);
  m.origin_x = region.x;
  m.origin_y = region.y;
  m.stride_x = scale_x;
  m.stride_y = scale_y;
  m.cand_w = tmpl.cols * scale_x;
  m.cand_h = tmpl.rows * scale_y;
  return m;
}

}  // namespace decaylab
