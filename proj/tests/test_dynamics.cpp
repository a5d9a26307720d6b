#include <doctest.h>

#include <cmath>

#include "decaylab/dynamics.hpp"
#include "decaylab/error.hpp"
#include "decaylab/synthvid.hpp"
#include "oracles.hpp"

using namespace decaylab;

namespace {

// Random instance: d features, n samples with truth, noise and label = truth + noise.
struct Instance {
  LinearTrackerModel model;
  std::vector<LabeledSample> data;
};

Instance random_instance(SplitMix64& rng, int d, int n, double noise_sd) {
  Instance in;
  in.model.phi = Eigen::MatrixXd(d, 4);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < 4; ++c) in.model.phi(i, c) = rng.normal();
  for (int k = 0; k < n; ++k) {
    LabeledSample s;
    s.features = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) s.features[i] = rng.normal();
    BoxVec truth;
    for (int c = 0; c < 4; ++c) {
      truth[c] = rng.uniform(-5, 5);
      s.noise[c] = noise_sd * rng.normal();
    }
    s.truth = truth;
    s.label = truth + s.noise;
    in.data.push_back(s);
  }
  return in;
}

double loss_at(const Instance& in, const std::vector<double>& flat) {
  LinearTrackerModel m = in.model;
  for (int i = 0; i < m.phi.rows(); ++i)
    for (int c = 0; c < 4; ++c) m.phi(i, c) = flat[static_cast<std::size_t>(i * 4 + c)];
  return loss_and_gradient(m, in.data).loss;
}

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) v.push_back(m(i, c));
  return v;
}

Sequence moving_sequence(int length, std::uint64_t seed, double velocity = 1.0) {
  SequenceConfig c;
  c.width = 96;
  c.height = 72;
  c.length = length;
  c.seed = seed;
  c.target_size = 16;
  c.motion.velocity = velocity;
  return generate_sequence(c);
}

}  // namespace

TEST_CASE("loss and gradient vanish when predictions equal labels") {
  SplitMix64 rng(1);
  Instance in = random_instance(rng, 6, 10, 0.0);
  for (auto& s : in.data) s.label = in.model.predict(s.features);
  const LossGradient lg = loss_and_gradient(in.model, in.data);
  CHECK(lg.loss < 1e-24);
  CHECK(lg.grad.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-sample gradient by hand") {
  LinearTrackerModel m{Eigen::MatrixXd::Zero(1, 4), nullptr};
  LabeledSample s;
  s.features = Eigen::VectorXd::Ones(1);
  s.label = BoxVec(1, 0, 0, 0);
  const LossGradient lg = loss_and_gradient(m, std::span<const LabeledSample>(&s, 1));
  CHECK(lg.grad(0, 0) == -2.0);
  CHECK(lg.loss == 1.0);
}

TEST_CASE("gradient matches central finite differences") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(rng, 5, 7, 0.7);
    const auto analytic = flatten(loss_and_gradient(in.model, in.data).grad);
    const auto numeric = oracle::finite_diff([&](const std::vector<double>& x) { return loss_at(in, x); },
                                             flatten(in.model.phi), 1e-5);
    CHECK(oracle::rel_err(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("loss_and_gradient input validation") {
  SplitMix64 rng(3);
  Instance in = random_instance(rng, 4, 3, 1.0);
  CHECK_THROWS(loss_and_gradient(in.model, std::span<const LabeledSample>()));
  in.data[1].features = Eigen::VectorXd::Zero(5);
  CHECK_THROWS(loss_and_gradient(in.model, in.data));
}

TEST_CASE("sgd_step arithmetic") {
  LinearTrackerModel m{Eigen::MatrixXd::Ones(1, 4), nullptr};
  const auto stepped = sgd_step(m, Eigen::MatrixXd::Constant(1, 4, 2.0), 0.5);
  CHECK(stepped.phi.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sgd_step(m, Eigen::MatrixXd::Zero(1, 4), 0.3).phi == m.phi);

  SplitMix64 rng(4);
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Random(1, 4), g2 = Eigen::MatrixXd::Random(1, 4);
  const auto two = sgd_step(sgd_step(m, g1, 0.1), g2, 0.1);
  const auto one = sgd_step(m, g1 + g2, 0.1);
  CHECK((two.phi - one.phi).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 4);
  bad(0, 2) = std::nan("");
  CHECK_THROWS_AS(sgd_step(m, bad, 0.1), NumericError);
}

TEST_CASE("decomposition extremes") {
  SplitMix64 rng(5);
  SUBCASE("no noise: no bias") {
    const Instance in = random_instance(rng, 6, 9, 0.0);
    const auto d = decompose_step(in.model, in.data, 0.1);
    CHECK(d.bias_term.cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.full_step - d.perfect_term).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("perfect model: only bias") {
    Instance in = random_instance(rng, 6, 9, 0.5);
    for (auto& s : in.data) {
      s.truth = in.model.predict(s.features);
      s.label = *s.truth + s.noise;
    }
    const auto d = decompose_step(in.model, in.data, 0.1);
    CHECK(d.perfect_term.cwiseAbs().maxCoeff() < 1e-14);
    CHECK((d.full_step - d.bias_term).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("missing truth rejected") {
    Instance in = random_instance(rng, 3, 4, 0.5);
    in.data[2].truth.reset();
    CHECK_THROWS(decompose_step(in.model, in.data, 0.1));
  }
}

TEST_CASE("full step equals perfect plus bias on random instances") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(rng, 1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(20)),
                                        rng.uniform(0, 3));
    const auto d = decompose_step(in.model, in.data, rng.uniform(0.001, 1.0));
    CHECK((d.full_step - d.perfect_term - d.bias_term).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dynamics prediction") {
  SplitMix64 rng(7);
  SUBCASE("no update, no drift") {
    const Instance in = random_instance(rng, 5, 6, 1.0);
    const auto d = decompose_step(in.model, in.data, 0.0);
    CHECK(dynamics_prediction(in.model, d, in.data[0]).predicted_change.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("bias-only update follows the sign of the noise") {
    Instance in = random_instance(rng, 5, 1, 0.0);
    auto& s = in.data[0];
    s.truth = in.model.predict(s.features);
    s.noise = BoxVec(0.8, -0.3, 0.2, -1.1);
    s.label = *s.truth + s.noise;
    const auto d = decompose_step(in.model, in.data, 0.05);
    const auto p = dynamics_prediction(in.model, d, s);
    const double g2 = s.features.squaredNorm();
    for (int c = 0; c < 4; ++c) {
      CHECK(p.decay_component[c] != 0.0);
      CHECK((p.decay_component[c] > 0) == (s.noise[c] * g2 > 0));
      CHECK(p.decay_component[c] == doctest::Approx(2 * 0.05 * s.noise[c] * g2).epsilon(1e-12));
    }
  }
  SUBCASE("exact for the linear model") {
    for (int trial = 0; trial < 100; ++trial) {
      const Instance in = random_instance(rng, 8, 10, 1.0);
      const auto d = decompose_step(in.model, in.data, 0.1);
      const auto next = sgd_step(in.model, d.gradient, 0.1);
      for (const auto& s : in.data) {
        const BoxVec change = next.predict(s.features) - in.model.predict(s.features);
        const auto p = dynamics_prediction(in.model, d, s);
        CHECK((change - p.predicted_change).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((p.predicted_change - p.perfect_component - p.decay_component).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("annotation noise moments") {
  SplitMix64 rng(8);
  const Box truth = Box::make(10, 20, 30, 40);
  const auto zero = corrupt_annotation(truth, 0.0, rng);
  CHECK(zero.delta == BoxVec::Zero());
  CHECK(zero.label == to_vec(truth));
  CHECK_THROWS(corrupt_annotation(Box::absent(), 1.0, rng));

  const double sigma = 1.7;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto a = corrupt_annotation(truth, sigma, rng);
    sum += a.delta[1];
    sq += a.delta[1] * a.delta[1];
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 4 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - sigma * sigma) < 0.05 * sigma * sigma);
}

TEST_CASE("decay experiment traces") {
  const Sequence seq = moving_sequence(40, 11);
  const double zero = 0.0, noisy = 1.5;
  const auto clean = run_decay_experiment(seq, std::span<const double>(&zero, 1), 0.05, 3);
  REQUIRE(clean.rows.size() == 40);
  for (const auto& r : clean.rows) CHECK(r.cum_bias == 0.0);

  const auto a = run_decay_experiment(seq, std::span<const double>(&noisy, 1), 0.05, 3);
  const auto b = run_decay_experiment(seq, std::span<const double>(&noisy, 1), 0.05, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].cum_bias == b.rows[i].cum_bias);
    CHECK(a.rows[i].loss == b.rows[i].loss);
    if (i > 0) {
      CHECK(a.rows[i].cum_bias >= a.rows[i - 1].cum_bias);
      CHECK(a.rows[i].cum_perfect >= a.rows[i - 1].cum_perfect);
    }
  }
  CHECK(a.rows.back().cum_bias > 0.0);

  std::vector<double> schedule(seq.size(), 0.0);
  schedule[5] = 2.0;
  const auto one = run_decay_experiment(seq, schedule, 0.05, 3);
  CHECK(one.rows[4].cum_bias == 0.0);
  CHECK(one.rows[5].cum_bias > 0.0);

  CHECK_THROWS_AS(run_decay_experiment(seq, std::span<const double>(), 0.05, 3), ConfigError);
}

TEST_CASE("windowed expectation only sees the last W samples") {
  const Sequence seq = moving_sequence(30, 12);
  const double sigma = 1.0;
  DecayExperimentOptions opts;
  opts.window = 5;
  const auto w = run_decay_experiment(seq, std::span<const double>(&sigma, 1), 0.05, 4, opts);
  const auto full = run_decay_experiment(seq, std::span<const double>(&sigma, 1), 0.05, 4);
  for (int i = 0; i < 5; ++i) CHECK(w.rows[i].cum_bias == full.rows[i].cum_bias);
  CHECK(w.rows.back().cum_bias != full.rows.back().cum_bias);
}
