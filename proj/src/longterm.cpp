#include "decaylab/longterm.hpp"

#include <stdexcept>

#include "decaylab/error.hpp"

namespace decaylab {

const char* to_string(UpdatePolicy p) {
  switch (p) {
    case UpdatePolicy::None: return "none";
    case UpdatePolicy::Blind: return "blind";
    case UpdatePolicy::SimilarityThreshold: return "sim-threshold";
    case UpdatePolicy::Gated: return "gated";
  }
  return "?";
}

UpdatePolicy policy_from_string(const std::string& s) {
  for (auto p : {UpdatePolicy::None, UpdatePolicy::Blind, UpdatePolicy::SimilarityThreshold, UpdatePolicy::Gated})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown update policy '" + s + "'");
}

LongTermTracker::LongTermTracker(const Frame& first, const Box& box, LongTermConfig cfg,
                                 std::shared_ptr<const GateClassifier> gate)
    : state_(siamese_init(first, box, cfg.siamese)), cfg_(std::move(cfg)), gate_(std::move(gate)) {
  if (cfg_.policy == UpdatePolicy::Gated && !gate_) throw ConfigError("gated update policy needs a gate checkpoint");
  if (cfg_.alpha < 0.0 || cfg_.alpha > 1.0) throw ConfigError("update alpha must be in [0, 1]");
  if (gate_) {
    // The first frame has no similarity map.
    history_.push_back(encode_map(*gate_, Grid(kGateMapSize, kGateMapSize)).features);
  }
}

StepResult LongTermTracker::step(const Frame& f) {
  StepResult r;
  r.prediction = hybrid_step(state_, f);
  const Prediction& p = r.prediction;

  if (gate_) {
    history_.push_back(map_features(*gate_, gate_input(p.map)));
    const auto K = static_cast<std::size_t>(gate_->window);
    while (history_.size() > K) history_.pop_front();
    std::vector<std::vector<double>> seq;
    seq.reserve(K);
    const std::vector<double> zero(kGateFeatures, 0.0);
    // Zero-pad before the start; a zero map encodes to zero features.
    for (std::size_t i = history_.size(); i < K; ++i) seq.push_back(zero);
    for (const auto& h : history_) seq.push_back(h);
    r.gate_score = gate_score(*gate_, seq);
  }

  const bool global_ok = !cfg_.restrict_to_global || p.search_kind == SearchKind::Global;
  switch (cfg_.policy) {
    case UpdatePolicy::None:
      break;
    case UpdatePolicy::Blind:
      if (p.candidate.present && p.candidate.w > 0 && p.candidate.h > 0) {
        Prediction at = p;
        at.box = p.candidate;
        template_update(state_, f, at, cfg_.alpha, true);
        r.updated = true;
      }
      break;
    case UpdatePolicy::SimilarityThreshold:
      if (p.box.present && global_ok && p.score > cfg_.sim_threshold) {
        template_update(state_, f, p, cfg_.alpha, true);
        r.updated = true;
      }
      break;
    case UpdatePolicy::Gated:
      if (p.box.present && global_ok && should_update(r.gate_score, cfg_.gate_threshold)) {
        template_update(state_, f, p, cfg_.alpha, true);
        r.updated = true;
      }
      break;
  }
  return r;
}

}  // namespace decaylab
