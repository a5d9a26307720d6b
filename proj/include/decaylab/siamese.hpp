#pragma once

// Template-matching siamese tracker. The similarity function is normalised
// cross-correlation against a fixed exemplar, so with updates disabled the
// model never changes after the first frame.

#include <array>
#include <vector>

#include "decaylab/geom.hpp"
#include "decaylab/similarity.hpp"

namespace decaylab {

enum class SearchKind { Local, Global };
const char* to_string(SearchKind k);

struct SiameseConfig {
  int template_size = 64;  // local search and global stage 3
  int coarse_size = 32;    // global stages 1-2
  std::vector<double> fine_scales{0.9509, 0.9751, 1.0, 1.0255, 1.0517};
  std::vector<double> global_scales = default_global_scales();
  int global_interval = 15;  // T; global search when frame_index % T == 0. 0 disables it.
  int candidates = 10;       // N
  double local_window = 3.0; // search window / box size
  double stage2_window = 1.5;
  double stage3_window = 1.5;
  // Best score below this is reported as absent (the search still returns
  // its candidate box). Global search uses the stricter redetect_threshold:
  // a whole-frame search finds background peaks around 0.55-0.75.
  double absence_threshold = 0.7;
  double redetect_threshold = 0.8;
  double min_box = 6.0;

  /// 2^{-0.4 : 0.08 : 0.4}
  static std::vector<double> default_global_scales();
};

struct SiameseState {
  Grid exemplar;  // zero-mean unit-norm, template_size^2; blended by gated updates
  Grid coarse;    // exemplar resampled to coarse_size^2, renormalised
  Box last_box;
  int frame_index = 0;
  SiameseConfig config;
};

struct Prediction {
  Box box;        // absent when the tracker declares the target not visible
  Box candidate;  // best-scoring placement regardless of the absence decision
  double score = 0.0;
  SearchKind search_kind = SearchKind::Local;
  SimilarityMap map;  // winning similarity map, kept for the decay gate
};

/// Throws std::invalid_argument on an absent, degenerate or out-of-frame box,
/// or when the exemplar has zero variance.
SiameseState siamese_init(const Frame& f, const Box& b, const SiameseConfig& cfg = {});

Prediction local_search(const SiameseState& s, const Frame& f);

struct GlobalSearchTrace {
  SimilarityMap stage1;
  std::vector<Box> stage1_candidates;  // top-N local maxima after suppression
  std::vector<Box> stage2_best;        // best (location, scale) per stage-1 candidate
  std::vector<double> stage2_scores;
};

Prediction global_search(const SiameseState& s, const Frame& f, GlobalSearchTrace* trace = nullptr);

/// Advances frame_index, runs global search on multiples of global_interval
/// and local search otherwise, and moves last_box to a present prediction.
Prediction hybrid_step(SiameseState& s, const Frame& f);

/// If permitted: exemplar <- normalise((1 - alpha) exemplar + alpha patch(p.box)).
/// Throws std::invalid_argument on alpha outside [0, 1] or an absent box.
void template_update(SiameseState& s, const Frame& f, const Prediction& p, double alpha, bool permitted);

/// Top-n cells in descending score, each suppressing a (2 radius + 1)^2
/// neighbourhood. Ties go to the smaller (row, col).
std::vector<MapPeak> top_local_maxima(const Grid& g, int n, int radius);

}  // namespace decaylab
