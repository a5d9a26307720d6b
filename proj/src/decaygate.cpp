#include "decaylab/decaygate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "decaylab/error.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

std::size_t LayerShape::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, [](std::size_t a, int b) { return a * b; });
}

const std::vector<LayerShape>& gate_layout() {
  static const std::vector<LayerShape> layout = [] {
    std::vector<LayerShape> l{
        {"conv1", {kGateConv1, 1, 3, 3}},
        {"conv2", {kGateConv2, kGateConv1, 3, 3}},
        {"gru1.W", {3, kGateHidden, kGateFeatures}},
        {"gru1.U", {3, kGateHidden, kGateHidden}},
        {"gru1.b", {3, kGateHidden}},
        {"gru2.W", {3, kGateHidden, kGateHidden}},
        {"gru2.U", {3, kGateHidden, kGateHidden}},
        {"gru2.b", {3, kGateHidden}},
        {"fc1.W", {kGateFc, kGateHidden}},
        {"fc1.b", {kGateFc}},
        {"fc2.W", {1, kGateFc}},
        {"fc2.b", {1}},
    };
    std::size_t off = 0;
    for (auto& s : l) {
      s.offset = off;
      off += s.size();
    }
    return l;
  }();
  return layout;
}

std::size_t gate_parameter_count() {
  const auto& l = gate_layout();
  return l.back().offset + l.back().size();
}

namespace {

const LayerShape& layer(const std::string& name) {
  for (const auto& s : gate_layout())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown gate layer: " + name);
}

}  // namespace

std::span<const double> GateClassifier::param(const std::string& name) const {
  const auto& s = layer(name);
  return std::span<const double>(theta).subspan(s.offset, s.size());
}

std::span<double> GateClassifier::param(const std::string& name) {
  const auto& s = layer(name);
  return std::span<double>(theta).subspan(s.offset, s.size());
}

GateClassifier zero_gate(int window) {
  GateClassifier c;
  c.window = window;
  c.theta.assign(gate_parameter_count(), 0.0);
  return c;
}

GateClassifier make_gate(std::uint64_t seed, int window) {
  GateClassifier c = zero_gate(window);
  SplitMix64 rng(derive_seed(seed, "gate-init"));
  auto he = [&](const std::string& name, int fan_in) {
    const double sd = std::sqrt(2.0 / fan_in);
    for (double& v : c.param(name)) v = sd * rng.normal();
  };
  auto uni = [&](const std::string& name, double a) {
    for (double& v : c.param(name)) v = rng.uniform(-a, a);
  };
  he("conv1", 9);
  he("conv2", 9 * kGateConv1);
  const double g = 1.0 / std::sqrt(static_cast<double>(kGateHidden));
  uni("gru1.W", 1.0 / std::sqrt(static_cast<double>(kGateFeatures)));
  uni("gru1.U", g);
  uni("gru2.W", g);
  uni("gru2.U", g);
  he("fc1.W", kGateHidden);
  uni("fc2.W", 1.0 / std::sqrt(static_cast<double>(kGateFc)));
  return c;
}

GateWindow GateWindow::from_grids(std::vector<Grid> grids, int label) {
  GateWindow w;
  w.label = label;
  for (auto& g : grids) w.maps.push_back(std::make_shared<const Grid>(std::move(g)));
  return w;
}

Grid gate_input(const Grid& values) {
  if (values.empty()) return Grid(kGateMapSize, kGateMapSize);
  if (values.rows == kGateMapSize && values.cols == kGateMapSize) return values;
  return resample_grid(values, kGateMapSize, kGateMapSize);
}

Grid gate_input(const SimilarityMap& m) { return gate_input(m.values); }

EncoderTrace encode_map(const GateClassifier& c, const Grid& map32) {
  if (map32.rows != kGateMapSize || map32.cols != kGateMapSize) throw std::invalid_argument("encode_map: expects a 32x32 map");
  EncoderTrace t;
  t.input = kernels::Tensor3(1, kGateMapSize, kGateMapSize);
  std::copy(map32.values.begin(), map32.values.end(), t.input.values.begin());
  t.pre1 = kernels::conv2d_valid_parallel(t.input, c.param("conv1"), kGateConv1, 3);
  kernels::Tensor3 act1 = t.pre1;
  for (double& v : act1.values) v = std::max(v, 0.0);
  t.pre2 = kernels::conv2d_valid_parallel(act1, c.param("conv2"), kGateConv2, 3);

  const int pooled = t.pre2.rows / kGatePool;
  t.features.assign(static_cast<std::size_t>(kGateConv2) * pooled * pooled, 0.0);
  t.pool_argmax.assign(t.features.size(), 0);
  std::size_t f = 0;
  for (int ch = 0; ch < kGateConv2; ++ch)
    for (int pr = 0; pr < pooled; ++pr)
      for (int pc = 0; pc < pooled; ++pc, ++f) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int a = 0; a < kGatePool; ++a)
          for (int b = 0; b < kGatePool; ++b) {
            const int r = pr * kGatePool + a, col = pc * kGatePool + b;
            const double v = t.pre2.at(ch, r, col);
            if (v > best) {
              best = v;
              best_idx = (ch * t.pre2.rows + r) * t.pre2.cols + col;
            }
          }
        t.features[f] = std::max(best, 0.0);
        t.pool_argmax[f] = best_idx;
      }
  return t;
}

std::vector<double> map_features(const GateClassifier& c, const Grid& map) { return encode_map(c, gate_input(map)).features; }

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct GruParams {
  const double* W;
  const double* U;
  const double* b;
  int in;
};

struct GruStep {
  std::vector<double> h_prev, z, r, n, un, h;
};

std::vector<GruStep> gru_forward(const GruParams& p, std::span<const std::vector<double>> xs) {
  constexpr int H = kGateHidden;
  std::vector<GruStep> steps(xs.size());
  std::vector<double> h(H, 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    GruStep& s = steps[k];
    const std::vector<double>& x = xs[k];
    s.h_prev = h;
    s.z.assign(H, 0.0);
    s.r.assign(H, 0.0);
    s.n.assign(H, 0.0);
    s.un.assign(H, 0.0);
    s.h.assign(H, 0.0);
    for (int i = 0; i < H; ++i) {
      double az = p.b[i], ar = p.b[H + i], an = p.b[2 * H + i], un = 0.0;
      const double* wz = p.W + static_cast<std::size_t>(i) * p.in;
      const double* wr = p.W + static_cast<std::size_t>(H + i) * p.in;
      const double* wn = p.W + static_cast<std::size_t>(2 * H + i) * p.in;
      for (int j = 0; j < p.in; ++j) {
        az += wz[j] * x[j];
        ar += wr[j] * x[j];
        an += wn[j] * x[j];
      }
      const double* uz = p.U + static_cast<std::size_t>(i) * H;
      const double* ur = p.U + static_cast<std::size_t>(H + i) * H;
      const double* uu = p.U + static_cast<std::size_t>(2 * H + i) * H;
      for (int j = 0; j < H; ++j) {
        az += uz[j] * h[j];
        ar += ur[j] * h[j];
        un += uu[j] * h[j];
      }
      s.z[i] = sigmoid(az);
      s.r[i] = sigmoid(ar);
      s.un[i] = un;
      s.n[i] = std::tanh(an + s.r[i] * un);
      s.h[i] = (1.0 - s.z[i]) * s.n[i] + s.z[i] * h[i];
    }
    h = s.h;
  }
  return steps;
}

// dh_ext[k]: gradient arriving at h_k from above. Accumulates into dW/dU/db
// and returns the gradient w.r.t. each input x_k.
std::vector<std::vector<double>> gru_backward(const GruParams& p, std::span<const std::vector<double>> xs,
                                              const std::vector<GruStep>& steps,
                                              const std::vector<std::vector<double>>& dh_ext, double* dW, double* dU,
                                              double* db) {
  constexpr int H = kGateHidden;
  std::vector<std::vector<double>> dxs(xs.size(), std::vector<double>(p.in, 0.0));
  std::vector<double> carry(H, 0.0);
  for (std::size_t kk = xs.size(); kk-- > 0;) {
    const GruStep& s = steps[kk];
    const std::vector<double>& x = xs[kk];
    std::vector<double> dh(H), dh_prev(H, 0.0), daz(H), dar(H), dan(H);
    for (int i = 0; i < H; ++i) dh[i] = dh_ext[kk][i] + carry[i];
    for (int i = 0; i < H; ++i) {
      const double dn = dh[i] * (1.0 - s.z[i]);
      const double dz = dh[i] * (s.h_prev[i] - s.n[i]);
      dh_prev[i] += dh[i] * s.z[i];
      dan[i] = dn * (1.0 - s.n[i] * s.n[i]);
      const double dr = dan[i] * s.un[i];
      dar[i] = dr * s.r[i] * (1.0 - s.r[i]);
      daz[i] = dz * s.z[i] * (1.0 - s.z[i]);
    }
    for (int i = 0; i < H; ++i) {
      const double g[3] = {daz[i], dar[i], dan[i]};
      for (int gate = 0; gate < 3; ++gate) {
        const std::size_t row = static_cast<std::size_t>(gate * H + i);
        db[row] += g[gate];
        double* dw = dW + row * p.in;
        const double* w = p.W + row * p.in;
        for (int j = 0; j < p.in; ++j) {
          dw[j] += g[gate] * x[j];
          dxs[kk][j] += w[j] * g[gate];
        }
        // The candidate gate sees U h through the reset gate.
        const double gu = gate == 2 ? dan[i] * s.r[i] : g[gate];
        double* du = dU + row * H;
        const double* u = p.U + row * H;
        for (int j = 0; j < H; ++j) {
          du[j] += gu * s.h_prev[j];
          dh_prev[j] += u[j] * gu;
        }
      }
    }
    carry = dh_prev;
  }
  return dxs;
}

struct HeadCache {
  std::vector<double> u, v;
  double logit = 0.0;
};

HeadCache head_forward(const GateClassifier& c, const std::vector<double>& h) {
  const auto W1 = c.param("fc1.W"), b1 = c.param("fc1.b"), W2 = c.param("fc2.W"), b2 = c.param("fc2.b");
  HeadCache hc;
  hc.u.assign(kGateFc, 0.0);
  hc.v.assign(kGateFc, 0.0);
  double o = b2[0];
  for (int i = 0; i < kGateFc; ++i) {
    double a = b1[i];
    for (int j = 0; j < kGateHidden; ++j) a += W1[static_cast<std::size_t>(i) * kGateHidden + j] * h[j];
    hc.u[i] = a;
    hc.v[i] = std::max(a, 0.0);
    o += W2[i] * hc.v[i];
  }
  hc.logit = o;
  return hc;
}

GruParams gru_params(const GateClassifier& c, int layer_index) {
  const std::string p = layer_index == 1 ? "gru1." : "gru2.";
  return {c.param(p + "W").data(), c.param(p + "U").data(), c.param(p + "b").data(),
          layer_index == 1 ? kGateFeatures : kGateHidden};
}

std::vector<std::vector<double>> hidden_sequence(const std::vector<GruStep>& steps) {
  std::vector<std::vector<double>> hs;
  hs.reserve(steps.size());
  for (const auto& s : steps) hs.push_back(s.h);
  return hs;
}

double bce_from_logit(double logit, int label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

// Encoder backward for one map; accumulates into conv1/conv2 gradients.
void encoder_backward(const GateClassifier& c, const EncoderTrace& t, const std::vector<double>& dfeat, double* dconv1,
                      double* dconv2) {
  const auto W2 = c.param("conv2");
  const int R2 = t.pre2.rows, C2 = t.pre2.cols;
  const int R1 = t.pre1.rows, C1 = t.pre1.cols;
  kernels::Tensor3 dact1(kGateConv1, R1, C1);
  for (std::size_t f = 0; f < dfeat.size(); ++f) {
    const int idx = t.pool_argmax[f];
    if (dfeat[f] == 0.0 || t.pre2.values[idx] <= 0.0) continue;
    const int o = idx / (R2 * C2), r = (idx / C2) % R2, col = idx % C2;
    const double g = dfeat[f];
    for (int i = 0; i < kGateConv1; ++i) {
      const std::size_t wbase = (static_cast<std::size_t>(o) * kGateConv1 + i) * 9;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double act = std::max(t.pre1.at(i, r + a, col + b), 0.0);
          dconv2[wbase + a * 3 + b] += g * act;
          dact1.at(i, r + a, col + b) += g * W2[wbase + a * 3 + b];
        }
    }
  }
  for (int o = 0; o < kGateConv1; ++o)
    for (int r = 0; r < R1; ++r)
      for (int col = 0; col < C1; ++col) {
        const double g = t.pre1.at(o, r, col) > 0.0 ? dact1.at(o, r, col) : 0.0;
        if (g == 0.0) continue;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) dconv1[o * 9 + a * 3 + b] += g * t.input.at(0, r + a, col + b);
      }
}

void check_window(const GateClassifier& c, const GateWindow& w) {
  if (static_cast<int>(w.maps.size()) != c.window)
    throw std::invalid_argument("gate: window has " + std::to_string(w.maps.size()) + " maps, expected " +
                                std::to_string(c.window));
}

// Loss for one labelled window; adds its (unscaled) gradient into grad when non-null.
double window_loss(const GateClassifier& c, const GateWindow& w, std::vector<double>* grad) {
  check_window(c, w);
  if (w.label != 0 && w.label != 1) throw std::invalid_argument("gate: training window is unlabeled");
  std::vector<EncoderTrace> enc;
  std::vector<std::vector<double>> feats;
  enc.reserve(w.maps.size());
  for (const auto& m : w.maps) {
    enc.push_back(encode_map(c, gate_input(*m)));
    feats.push_back(enc.back().features);
  }
  const GruParams g1 = gru_params(c, 1), g2 = gru_params(c, 2);
  const auto steps1 = gru_forward(g1, feats);
  const auto h1 = hidden_sequence(steps1);
  const auto steps2 = gru_forward(g2, h1);
  const HeadCache head = head_forward(c, steps2.back().h);
  const double loss = bce_from_logit(head.logit, w.label);
  if (!grad) return loss;

  auto slot = [&](const std::string& name) { return grad->data() + layer(name).offset; };
  const double dlogit = sigmoid(head.logit) - w.label;
  const auto W1 = c.param("fc1.W"), W2 = c.param("fc2.W");
  slot("fc2.b")[0] += dlogit;
  std::vector<double> dh_top(kGateHidden, 0.0);
  for (int i = 0; i < kGateFc; ++i) {
    slot("fc2.W")[i] += dlogit * head.v[i];
    const double du = head.u[i] > 0.0 ? dlogit * W2[i] : 0.0;
    if (du == 0.0) continue;
    slot("fc1.b")[i] += du;
    for (int j = 0; j < kGateHidden; ++j) {
      slot("fc1.W")[static_cast<std::size_t>(i) * kGateHidden + j] += du * steps2.back().h[j];
      dh_top[j] += W1[static_cast<std::size_t>(i) * kGateHidden + j] * du;
    }
  }
  std::vector<std::vector<double>> dh2(feats.size(), std::vector<double>(kGateHidden, 0.0));
  dh2.back() = dh_top;
  const auto dh1 = gru_backward(g2, h1, steps2, dh2, slot("gru2.W"), slot("gru2.U"), slot("gru2.b"));
  const auto dfeat = gru_backward(g1, feats, steps1, dh1, slot("gru1.W"), slot("gru1.U"), slot("gru1.b"));
  for (std::size_t k = 0; k < enc.size(); ++k) encoder_backward(c, enc[k], dfeat[k], slot("conv1"), slot("conv2"));
  return loss;
}

}  // namespace

double gate_score(const GateClassifier& c, std::span<const std::vector<double>> features) {
  if (static_cast<int>(features.size()) != c.window) throw std::invalid_argument("gate: wrong number of feature steps");
  const auto steps1 = gru_forward(gru_params(c, 1), features);
  const auto h1 = hidden_sequence(steps1);
  const auto steps2 = gru_forward(gru_params(c, 2), h1);
  return sigmoid(head_forward(c, steps2.back().h).logit);
}

double gate_forward(const GateClassifier& c, const GateWindow& w) {
  check_window(c, w);
  std::vector<std::vector<double>> feats;
  feats.reserve(w.maps.size());
  for (const auto& m : w.maps) feats.push_back(encode_map(c, gate_input(*m)).features);
  return gate_score(c, feats);
}

double gate_loss_and_gradient(const GateClassifier& c, std::span<const GateWindow> batch, std::vector<double>* grad) {
  if (batch.empty()) throw std::invalid_argument("gate: empty batch");
  const std::size_t P = gate_parameter_count();
  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::vector<double>> grads(grad ? batch.size() : 0);
  std::vector<std::exception_ptr> errors(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      std::vector<double>* gi = nullptr;
      if (grad) {
        grads[i].assign(P, 0.0);
        gi = &grads[i];
      }
      losses[i] = window_loss(c, batch[i], gi);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  // Ordered reduction keeps results independent of thread count.
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (double l : losses) loss += l;
  if (grad) {
    grad->assign(P, 0.0);
    for (const auto& gi : grads)
      for (std::size_t j = 0; j < P; ++j) (*grad)[j] += gi[j];
    for (double& v : *grad) v *= inv;
  }
  return loss * inv;
}

double gate_train_step(GateClassifier& c, std::vector<double>& velocity, std::span<const GateWindow> batch, double lr,
                       double momentum) {
  if (!(lr >= 0.0)) throw std::invalid_argument("gate_train_step: lr must be >= 0");
  std::vector<double> grad;
  const double loss = gate_loss_and_gradient(c, batch, &grad);
  if (!std::isfinite(loss)) throw NumericError("gate_train_step: non-finite loss");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("gate_train_step: non-finite gradient");
  if (velocity.size() != c.theta.size()) velocity.assign(c.theta.size(), 0.0);
  for (std::size_t j = 0; j < c.theta.size(); ++j) {
    velocity[j] = momentum * velocity[j] + grad[j];
    c.theta[j] -= lr * velocity[j];
  }
  return loss;
}

std::vector<GateWindow> build_training_set(const TrackRecord& track, int window) {
  if (window < 1) throw std::invalid_argument("build_training_set: window must be >= 1");
  const std::size_t n = track.predictions.size();
  if (track.truth.size() != n) throw DataError("build_training_set: track is missing ground truth");
  if (track.maps.size() != n) throw DataError("build_training_set: one map per frame required");
  std::vector<std::shared_ptr<const Grid>> inputs;
  inputs.reserve(n);
  for (const auto& m : track.maps) inputs.push_back(std::make_shared<const Grid>(gate_input(m)));
  const auto zero = std::make_shared<const Grid>(kGateMapSize, kGateMapSize);

  std::vector<GateWindow> out;
  for (std::size_t t = 0; t < n; ++t) {
    const Box& p = track.predictions[t];
    if (!p.present) continue;
    const double v = track.truth[t].present ? iou(p, track.truth[t]) : 0.0;
    if (v == 0.5) continue;
    GateWindow w;
    w.label = v > 0.5 ? 1 : 0;
    for (int k = window - 1; k >= 0; --k) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t) - k;
      w.maps.push_back(idx < 0 ? zero : inputs[static_cast<std::size_t>(idx)]);
    }
    out.push_back(std::move(w));
  }
  return out;
}

bool should_update(double score, double threshold) { return score > threshold; }

namespace {
constexpr const char* kGateFormat = "decaylab-gate";
constexpr int kGateVersion = 1;
}  // namespace

void save_gate(const GateClassifier& c, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kGateFormat;
  j["version"] = kGateVersion;
  j["window"] = c.window;
  j["layers"] = nlohmann::json::array();
  for (const auto& s : gate_layout()) j["layers"].push_back({{"name", s.name}, {"shape", s.shape}});
  j["theta"] = c.theta;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write gate checkpoint " + path.string());
  out << j.dump() << '\n';
}

GateClassifier load_gate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gate checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("gate checkpoint is not valid JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != kGateFormat) throw DataError("gate checkpoint: wrong format tag");
  if (j.value("version", 0) != kGateVersion) throw DataError("gate checkpoint: unsupported version");
  const auto& layers = j.at("layers");
  const auto& expected = gate_layout();
  if (layers.size() != expected.size()) throw DataError("gate checkpoint: layer count mismatch");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (layers[i].at("name").get<std::string>() != expected[i].name ||
        layers[i].at("shape").get<std::vector<int>>() != expected[i].shape)
      throw DataError("gate checkpoint: layer " + std::to_string(i) + " does not match " + expected[i].name);
  }
  GateClassifier c;
  c.window = j.at("window").get<int>();
  c.theta = j.at("theta").get<std::vector<double>>();
  if (c.theta.size() != gate_parameter_count()) throw DataError("gate checkpoint: parameter count mismatch");
  if (c.window < 1) throw DataError("gate checkpoint: window must be >= 1");
  return c;
}

GateTrainingReport train_gate(GateClassifier& c, std::span<const GateWindow> data, const GateTrainingOptions& opts) {
  if (data.empty()) throw ConfigError("train_gate: empty training set");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data[i].label == 1 ? pos : neg).push_back(i);
  SplitMix64 rng(derive_seed(opts.seed, "gate-batches"));
  std::vector<double> velocity;
  GateTrainingReport report;
  for (int step = 0; step < opts.steps; ++step) {
    std::vector<GateWindow> batch;
    batch.reserve(static_cast<std::size_t>(opts.batch));
    for (int b = 0; b < opts.batch; ++b) {
      const auto& pool = (pos.empty() || neg.empty()) ? (pos.empty() ? neg : pos) : (b % 2 == 0 ? pos : neg);
      batch.push_back(data[pool[rng.below(static_cast<std::uint32_t>(pool.size()))]]);
    }
    const double loss = gate_train_step(c, velocity, batch, opts.lr, opts.momentum);
    report.losses.push_back(loss);
    if (opts.target_loss > 0.0 && loss < opts.target_loss) break;
  }
  return report;
}

}  // namespace decaylab
