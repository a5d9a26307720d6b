#pragma once

// Long-term tracker: hybrid local/global siamese search plus an update policy
// deciding when the exemplar is blended with the current prediction.

#include <deque>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "decaylab/decaygate.hpp"
#include "decaylab/siamese.hpp"

namespace decaylab {

enum class UpdatePolicy { None, Blind, SimilarityThreshold, Gated };
const char* to_string(UpdatePolicy p);
UpdatePolicy policy_from_string(const std::string& s);

struct LongTermConfig {
  SiameseConfig siamese;
  UpdatePolicy policy = UpdatePolicy::None;
  double alpha = 0.1;
  double sim_threshold = 0.5;
  double gate_threshold = 0.9;
  // Thresholded and gated updates only fire on global-search frames.
  // Blind updates ignore this.
  bool restrict_to_global = true;
};

struct StepResult {
  Prediction prediction;
  bool updated = false;
  double gate_score = std::numeric_limits<double>::quiet_NaN();  // NaN when the gate was not run
};

class LongTermTracker {
 public:
  /// A gate is required for UpdatePolicy::Gated. With any other policy a
  /// gate is optional and only scored (StepResult::gate_score).
  LongTermTracker(const Frame& first, const Box& box, LongTermConfig cfg,
                  std::shared_ptr<const GateClassifier> gate = nullptr);

  StepResult step(const Frame& f);

  const SiameseState& state() const { return state_; }
  const LongTermConfig& config() const { return cfg_; }

 private:
  SiameseState state_;
  LongTermConfig cfg_;
  std::shared_ptr<const GateClassifier> gate_;
  std::deque<std::vector<double>> history_;  // encoded maps, oldest first, at most K
};

}  // namespace decaylab
