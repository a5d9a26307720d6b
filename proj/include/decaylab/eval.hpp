#pragma once

// Long-term tracking metrics. Frames where the target is absent are scored
// with IoU 0 if a box is predicted, and with full credit (IoU 1) for a
// correct absence unless AbsenceMode::Exclude drops those frames.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decaylab/geom.hpp"
#include "decaylab/siamese.hpp"
#include "decaylab/synthvid.hpp"

namespace decaylab {

struct TrackResult {
  std::string name;
  std::vector<Box> predictions;
  std::vector<double> scores;           // optional; empty or one per frame
  std::vector<SearchKind> search_kinds;  // optional; empty or one per frame
  std::vector<Box> truth;
  std::vector<ChallengeTag> tags;
  std::vector<int> repetition_boundaries;
};

enum class AbsenceMode { Credit, Exclude };

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct EvalReport {
  std::vector<double> thresholds;
  std::vector<double> success;
  double auc = 0.0;
  double tpr = 0.0;  // NaN when the sequence has no visible frames
  PrecisionRecall prf;
  std::map<ChallengeTag, double> per_challenge;
  std::vector<double> per_repetition;
};

/// 0, 0.05, ..., 1.
std::vector<double> default_thresholds();

double frame_iou(const Box& pred, const Box& truth);

/// success(tau) = fraction of frames with frame_iou > tau. A frame with
/// IoU exactly 1 succeeds at every threshold, including tau = 1, so perfect
/// tracking scores an AUC of 1.
/// Throws std::invalid_argument on an empty or misaligned result.
std::vector<double> success_curve(const TrackResult& r, const std::vector<double>& thresholds = default_thresholds(),
                                  AbsenceMode mode = AbsenceMode::Credit);
double auc(const TrackResult& r, AbsenceMode mode = AbsenceMode::Credit);

/// Fraction of truth-present frames localised with IoU > tau.
/// Throws std::invalid_argument when no frame has a visible target.
double tpr(const TrackResult& r, double tau = 0.5);

/// IoU-threshold surrogate; an undefined ratio is reported as 0.
PrecisionRecall pr_f(const TrackResult& r, double tau = 0.5);

/// Mean AUC per tag over the results carrying it.
std::map<ChallengeTag, double> per_challenge_report(const std::vector<TrackResult>& results,
                                                    AbsenceMode mode = AbsenceMode::Credit);

/// AUC over each repetition span [b_k, b_{k+1}); the last span runs to the end.
/// Throws std::invalid_argument on empty, unsorted or out-of-range boundaries.
std::vector<double> per_repetition_curve(const TrackResult& r, AbsenceMode mode = AbsenceMode::Credit);

EvalReport evaluate(const TrackResult& r, AbsenceMode mode = AbsenceMode::Credit);

nlohmann::json report_to_json(const EvalReport& rep);
void write_report_json(const EvalReport& rep, const std::filesystem::path& path);
/// tau,success
void write_curve_csv(const EvalReport& rep, const std::filesystem::path& path);

/// frame,x,y,w,h,present,score,search_kind
void write_predictions_csv(const TrackResult& r, const std::filesystem::path& path);
/// Fills predictions, scores and search_kinds of a result.
void read_predictions_csv(const std::filesystem::path& path, TrackResult& r);

}  // namespace decaylab
