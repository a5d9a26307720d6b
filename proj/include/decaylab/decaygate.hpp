#pragma once

// Decay recognition gate. A binary classifier over the last K similarity maps
// that decides whether an appearance update is safe right now. It sees only
// similarity maps, never tracker parameters.
//
// Architecture (all parameters in one flat vector, see gate_layout()):
//   per map   32x32 -> conv3x3(1->8) -> ReLU -> conv3x3(8->16) -> ReLU
//             -> maxpool 5x5 / stride 5 -> 16x5x5 = 400 features
//   sequence  two stacked GRU layers, hidden width 32, h_0 = 0
//   head      FC 32->16, ReLU, FC 16->1, sigmoid
// Convolutions are valid-padded, stride 1 and bias-free.
//
// GRU cell (per layer, input x, previous state h):
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   n  = tanh(Wn x + r * (Un h) + bn)
//   h' = (1 - z) * n + z * h

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "decaylab/geom.hpp"
#include "decaylab/kernels.hpp"
#include "decaylab/similarity.hpp"

namespace decaylab {

inline constexpr int kGateMapSize = 32;
inline constexpr int kGateConv1 = 8;
inline constexpr int kGateConv2 = 16;
inline constexpr int kGatePool = 5;
inline constexpr int kGateFeatures = kGateConv2 * 5 * 5;  // 400
inline constexpr int kGateHidden = 32;
inline constexpr int kGateFc = 16;

struct LayerShape {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size() const;
};

/// Parameter manifest in storage order.
const std::vector<LayerShape>& gate_layout();
std::size_t gate_parameter_count();

struct GateClassifier {
  int window = 8;  // K
  std::vector<double> theta;

  std::span<const double> param(const std::string& name) const;
  std::span<double> param(const std::string& name);
};

/// He-style random init from the given seed.
GateClassifier make_gate(std::uint64_t seed, int window = 8);
GateClassifier zero_gate(int window = 8);

struct GateWindow {
  // Exactly K maps, oldest first, zero grids pad the start. Shared because
  // consecutive windows overlap in K - 1 maps.
  std::vector<std::shared_ptr<const Grid>> maps;
  int label = -1;  // 1 positive, 0 negative, -1 unlabeled

  static GateWindow from_grids(std::vector<Grid> grids, int label = -1);
};

/// Intermediate tensors of the encoder for one map.
struct EncoderTrace {
  kernels::Tensor3 input;  // 1 x 32 x 32
  kernels::Tensor3 pre1;   // conv1 output before ReLU
  kernels::Tensor3 pre2;   // conv2 output before ReLU
  std::vector<double> features;     // 400, after max-pool
  std::vector<int> pool_argmax;     // flat index into pre2 for each feature
};

/// Similarity map -> 32x32 grid the encoder expects.
Grid gate_input(const SimilarityMap& m);
Grid gate_input(const Grid& values);

EncoderTrace encode_map(const GateClassifier& c, const Grid& map32);
/// map_features: resample to 32x32 and encode; returns the 400 pooled features.
std::vector<double> map_features(const GateClassifier& c, const Grid& map);

/// Recurrent pass + head over pre-encoded features (oldest first).
double gate_score(const GateClassifier& c, std::span<const std::vector<double>> features);
double gate_forward(const GateClassifier& c, const GateWindow& w);

/// Mean binary cross-entropy over labelled windows, and its gradient w.r.t. theta.
double gate_loss_and_gradient(const GateClassifier& c, std::span<const GateWindow> batch, std::vector<double>* grad);

/// One SGD-with-momentum step (v <- mu v + g; theta <- theta - lr v).
/// Returns the pre-step loss. Throws NumericError and leaves c and velocity
/// untouched if the loss or gradient is not finite.
double gate_train_step(GateClassifier& c, std::vector<double>& velocity, std::span<const GateWindow> batch, double lr,
                       double momentum);

/// Per-frame record of a tracker run, as consumed by build_training_set.
struct TrackRecord {
  std::vector<Grid> maps;  // gate inputs (32x32), empty grid when the frame had no map
  std::vector<Box> predictions;
  std::vector<Box> truth;
};

/// Window ending at every frame with a present prediction. Label: IoU with
/// truth > 0.5 positive, < 0.5 negative, == 0.5 dropped. An absent truth
/// under a present prediction counts as IoU 0.
std::vector<GateWindow> build_training_set(const TrackRecord& track, int window);

/// omega = score > threshold.
bool should_update(double score, double threshold);

void save_gate(const GateClassifier& c, const std::filesystem::path& path);
/// Validates format, version and the layer manifest exactly.
GateClassifier load_gate(const std::filesystem::path& path);

struct GateTrainingOptions {
  int steps = 300;
  int batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  double target_loss = 0.0;  // stop early once the running batch loss drops below this
  std::uint64_t seed = 7;
};

struct GateTrainingReport {
  std::vector<double> losses;
};

/// Class-balanced minibatch SGD over `data`.
GateTrainingReport train_gate(GateClassifier& c, std::span<const GateWindow> data, const GateTrainingOptions& opts);

}  // namespace decaylab
