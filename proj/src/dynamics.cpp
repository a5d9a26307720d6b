#include "decaylab/dynamics.hpp"

#include <cmath>
#include <fstream>

#include "decaylab/error.hpp"
#include "decaylab/synthvid.hpp"

namespace decaylab {

BoxVec to_vec(const Box& b) { return BoxVec(b.x, b.y, b.w, b.h); }
Box to_box(const BoxVec& v) { return Box::make(v[0], v[1], v[2], v[3]); }

Eigen::VectorXd PatchFeatureMap::operator()(const Frame& f, const Box& context) const {
  Box ctx = context;
  ctx.present = true;
  ctx.w = std::max(ctx.w, 1.0);
  ctx.h = std::max(ctx.h, 1.0);
  const Grid patch = sample_patch(f, ctx, side_, side_);
  Eigen::VectorXd g(dimension());
  double mean = 0.0;
  for (double v : patch.values) mean += v;
  mean /= static_cast<double>(patch.values.size());
  for (std::size_t i = 0; i < patch.values.size(); ++i) g[static_cast<Eigen::Index>(i)] = patch.values[i] - mean;
  g[dimension() - 1] = 1.0;
  return g;
}

namespace {

void check_samples(const LinearTrackerModel& m, std::span<const LabeledSample> data) {
  if (data.empty()) throw ConfigError("dynamics: dataset is empty");
  for (const auto& s : data)
    if (s.features.size() != m.phi.rows()) throw ConfigError("dynamics: feature dimension does not match model");
}

}  // namespace

LossGradient loss_and_gradient(const LinearTrackerModel& m, std::span<const LabeledSample> data) {
  check_samples(m, data);
  const double inv_t = 1.0 / static_cast<double>(data.size());
  Eigen::MatrixXd e_fg = Eigen::MatrixXd::Zero(m.phi.rows(), 4);
  Eigen::MatrixXd e_yg = Eigen::MatrixXd::Zero(m.phi.rows(), 4);
  double loss = 0.0;
  for (const auto& s : data) {
    const BoxVec f = m.predict(s.features);
    loss += (s.label - f).squaredNorm();
    e_fg.noalias() += s.features * f.transpose();
    e_yg.noalias() += s.features * s.label.transpose();
  }
  LossGradient out;
  out.loss = loss * inv_t;
  out.grad = 2.0 * (e_fg * inv_t) - 2.0 * (e_yg * inv_t);
  return out;
}

LinearTrackerModel sgd_step(const LinearTrackerModel& m, const Eigen::MatrixXd& grad, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("sgd_step: eta must be finite and non-negative");
  if (grad.rows() != m.phi.rows() || grad.cols() != m.phi.cols()) throw ConfigError("sgd_step: gradient shape mismatch");
  if (!grad.allFinite()) throw NumericError("sgd_step: non-finite gradient");
  LinearTrackerModel out = m;
  out.phi = m.phi - eta * grad;
  return out;
}

UpdateDecomposition decompose_step(const LinearTrackerModel& m, std::span<const LabeledSample> data, double eta) {
  check_samples(m, data);
  for (const auto& s : data)
    if (!s.truth) throw ConfigError("decompose_step: sample lacks ground truth");

  const LossGradient lg = loss_and_gradient(m, data);
  const double inv_t = 1.0 / static_cast<double>(data.size());
  Eigen::MatrixXd e_err = Eigen::MatrixXd::Zero(m.phi.rows(), 4);
  Eigen::MatrixXd e_delta = Eigen::MatrixXd::Zero(m.phi.rows(), 4);
  for (const auto& s : data) {
    const BoxVec f = m.predict(s.features);
    e_err.noalias() += s.features * (f - *s.truth).transpose();
    e_delta.noalias() += s.features * s.noise.transpose();
  }
  UpdateDecomposition d;
  d.eta = eta;
  d.loss = lg.loss;
  d.gradient = lg.grad;
  d.full_step = -eta * lg.grad;
  d.perfect_term = -2.0 * eta * (e_err * inv_t);
  d.bias_term = 2.0 * eta * (e_delta * inv_t);
  return d;
}

DynamicsPrediction dynamics_prediction(const LinearTrackerModel& m, const UpdateDecomposition& dec,
                                       const LabeledSample& sample) {
  if (sample.features.size() != m.phi.rows() || dec.full_step.rows() != m.phi.rows())
    throw ConfigError("dynamics_prediction: dimension mismatch");
  DynamicsPrediction p;
  p.predicted_change = dec.full_step.transpose() * sample.features;
  p.perfect_component = dec.perfect_term.transpose() * sample.features;
  p.decay_component = dec.bias_term.transpose() * sample.features;
  return p;
}

AnnotationNoise corrupt_annotation(const Box& truth, double sigma, SplitMix64& rng) {
  if (!truth.present) throw ConfigError("corrupt_annotation: truth box is absent");
  if (!(sigma >= 0.0)) throw ConfigError("corrupt_annotation: sigma must be >= 0");
  AnnotationNoise n;
  for (int c = 0; c < 4; ++c) n.delta[c] = sigma * rng.normal();
  n.label = to_vec(truth) + n.delta;
  return n;
}

DecayTrace run_decay_experiment(const Sequence& seq, std::span<const double> sigma_schedule, double eta,
                                std::uint64_t seed, const DecayExperimentOptions& opts) {
  if (seq.frames.empty() || seq.truth.size() != seq.frames.size()) throw ConfigError("decay experiment: empty sequence");
  if (sigma_schedule.empty()) throw ConfigError("decay experiment: empty sigma schedule");
  if (sigma_schedule.size() != 1 && sigma_schedule.size() != seq.frames.size())
    throw ConfigError("decay experiment: sigma schedule length must be 1 or the sequence length");
  if (!(eta >= 0.0)) throw ConfigError("decay experiment: eta must be >= 0");
  if (!seq.truth.front().present) throw ConfigError("decay experiment: first frame must carry a box");

  auto fmap = std::make_shared<PatchFeatureMap>(opts.patch_side);
  LinearTrackerModel model{Eigen::MatrixXd::Zero(fmap->dimension(), 4), fmap};
  // Only the constant feature carries weight initially: f = first-frame box.
  model.phi.row(fmap->dimension() - 1) = to_vec(seq.truth.front()).transpose();

  SplitMix64 rng(derive_seed(seed, "annotation-noise"));
  std::vector<LabeledSample> data;
  data.reserve(seq.frames.size());
  Box context = seq.truth.front();
  DecayTrace trace;
  double cum_bias = 0.0, cum_perfect = 0.0;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const Box& truth = seq.truth[i];
    if (!truth.present) continue;
    const double sigma = sigma_schedule.size() == 1 ? sigma_schedule[0] : sigma_schedule[i];

    LabeledSample s;
    s.features = (*fmap)(seq.frames[i], context);
    const BoxVec f = model.predict(s.features);
    const AnnotationNoise noise = corrupt_annotation(truth, sigma, rng);
    s.label = noise.label;
    s.noise = noise.delta;
    s.truth = to_vec(truth);
    data.push_back(std::move(s));

    std::span<const LabeledSample> window(data);
    if (opts.window > 0 && data.size() > static_cast<std::size_t>(opts.window))
      window = window.subspan(data.size() - static_cast<std::size_t>(opts.window));
    const UpdateDecomposition dec = decompose_step(model, window, eta);
    model = sgd_step(model, dec.gradient, eta);

    cum_bias += dec.bias_term.norm();
    cum_perfect += dec.perfect_term.norm();
    trace.rows.push_back({static_cast<int>(i), dec.loss, cum_bias, cum_perfect, (f - to_vec(truth)).norm()});
    context = to_box(f);
  }
  return trace;
}

void write_trace_csv(const DecayTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "t,loss,cum_bias,cum_perfect,pred_error\n";
  char buf[256];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.t, r.loss, r.cum_bias, r.cum_perfect, r.pred_error);
    out << buf;
  }
}

}  // namespace decaylab
