#pragma once

// Online gradient descent on a tracker that is linear in its parameters,
// f(x; phi) = phi^T g(x), trained on noisy self-labels y = y* + delta.
// Because f is linear in phi the split of every step into a perfect-update
// part and a bias part, and the induced change in predictions, are exact
// identities rather than first-order approximations.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "decaylab/geom.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

struct Sequence;

using BoxVec = Eigen::Vector4d;  // (x, y, w, h)

BoxVec to_vec(const Box& b);
Box to_box(const BoxVec& v);

/// Model-independent featuriser: (frame, search context) -> d-vector.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd operator()(const Frame& f, const Box& context) const = 0;
};

/// Flattened side x side patch around the context box, mean-subtracted, with
/// a trailing constant 1. Dimension side^2 + 1 (257 for the default 16).
class PatchFeatureMap final : public FeatureMap {
 public:
  explicit PatchFeatureMap(int side = 16) : side_(side) {}
  int dimension() const override { return side_ * side_ + 1; }
  Eigen::VectorXd operator()(const Frame& f, const Box& context) const override;

 private:
  int side_;
};

struct LinearTrackerModel {
  Eigen::MatrixXd phi;  // d x 4
  std::shared_ptr<const FeatureMap> feature_map;

  int dimension() const { return static_cast<int>(phi.rows()); }
  BoxVec predict(const Eigen::VectorXd& g) const { return phi.transpose() * g; }
};

struct LabeledSample {
  Eigen::VectorXd features;     // g(x_i), frozen when the sample is collected
  BoxVec label;                 // y_i
  std::optional<BoxVec> truth;  // y_i*, oracle only
  BoxVec noise = BoxVec::Zero();  // delta_i, stored exactly
};

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // d x 4
};

struct UpdateDecomposition {
  Eigen::MatrixXd full_step;     // -eta * grad, from the plain gradient
  Eigen::MatrixXd perfect_term;  // -2 eta E[(f_i - y_i*) g_i]
  Eigen::MatrixXd bias_term;     // +2 eta E[delta_i g_i]
  Eigen::MatrixXd gradient;
  double loss = 0.0;
  double eta = 0.0;
};

struct DynamicsPrediction {
  BoxVec predicted_change;
  BoxVec perfect_component;
  BoxVec decay_component;
};

/// loss = E_i sum_c (y_ic - f_ic)^2, grad = 2 E[f g] - 2 E[y g], E = mean over D.
LossGradient loss_and_gradient(const LinearTrackerModel& m, std::span<const LabeledSample> data);

/// phi - eta * grad. eta == 0 is allowed and leaves the model unchanged.
LinearTrackerModel sgd_step(const LinearTrackerModel& m, const Eigen::MatrixXd& grad, double eta);

UpdateDecomposition decompose_step(const LinearTrackerModel& m, std::span<const LabeledSample> data, double eta);

DynamicsPrediction dynamics_prediction(const LinearTrackerModel& m, const UpdateDecomposition& dec,
                                       const LabeledSample& sample);

struct AnnotationNoise {
  BoxVec label;
  BoxVec delta;
};

/// Independent N(0, sigma^2) on each of the four coordinates.
AnnotationNoise corrupt_annotation(const Box& truth, double sigma, SplitMix64& rng);

struct DecayTraceRow {
  int t = 0;
  double loss = 0.0;
  double cum_bias = 0.0;
  double cum_perfect = 0.0;
  double pred_error = 0.0;
};

struct DecayTrace {
  std::vector<DecayTraceRow> rows;
};

struct DecayExperimentOptions {
  int patch_side = 16;
  int window = 0;  // 0: expectation over the whole history (1/t weights); W > 0: last W samples
};

/// One sample per frame with a present truth box: featurise around the
/// previous prediction, corrupt the truth with sigma_schedule[frame], append,
/// decompose, step. A schedule of length 1 is broadcast to every frame.
DecayTrace run_decay_experiment(const Sequence& seq, std::span<const double> sigma_schedule, double eta,
                                std::uint64_t seed, const DecayExperimentOptions& opts = {});

void write_trace_csv(const DecayTrace& trace, const std::filesystem::path& path);

}  // namespace decaylab
