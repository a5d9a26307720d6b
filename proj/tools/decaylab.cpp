// decaylab command-line driver. Each subcommand takes an optional JSON
// config (--config); explicit flags override values from the file.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "decaylab/decaygate.hpp"
#include "decaylab/error.hpp"
#include "decaylab/eval.hpp"
#include "decaylab/harness.hpp"
#include "decaylab/synthvid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace decaylab;

namespace {

json load_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename T>
void override(const CLI::Option* opt, const std::optional<T>& v, T& target) {
  if (opt && opt->count() && v) target = *v;
}

void apply_tracker_flags(TrackerOptions& o, const json& j) {
  if (!j.contains("tracker")) return;
  const auto& t = j.at("tracker");
  o.global_interval = t.value("global_interval", o.global_interval);
  o.alpha = t.value("alpha", o.alpha);
  o.sim_threshold = t.value("sim_threshold", o.sim_threshold);
  o.gate_threshold = t.value("gate_threshold", o.gate_threshold);
  o.restrict_to_global = t.value("restrict_to_global", o.restrict_to_global);
}

struct TrackerFlags {
  std::optional<int> T;
  std::optional<double> alpha, sim_threshold, gate_threshold;
  CLI::Option *T_opt = nullptr, *alpha_opt = nullptr, *sim_opt = nullptr, *gate_opt = nullptr;

  void add(CLI::App* app) {
    T_opt = app->add_option("--global-interval", T, "global search period T (0 disables)");
    alpha_opt = app->add_option("--alpha", alpha, "template blend rate");
    sim_opt = app->add_option("--sim-threshold", sim_threshold, "similarity update threshold");
    gate_opt = app->add_option("--gate-threshold", gate_threshold, "gate decision threshold");
  }
  void apply(TrackerOptions& o) const {
    override(T_opt, T, o.global_interval);
    override(alpha_opt, alpha, o.alpha);
    override(sim_opt, sim_threshold, o.sim_threshold);
    override(gate_opt, gate_threshold, o.gate_threshold);
  }
};

std::vector<Sequence> read_sequences(const std::vector<std::string>& dirs) {
  std::vector<Sequence> out;
  for (const auto& d : dirs) out.push_back(read_sequence(d));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decaylab: model-decay experiments for visual tracking"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic sequence");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<int> gen_length, gen_reps;
  gen->add_option("--config", gen_config, "sequence config JSON");
  gen->add_option("--out", gen_out, "output directory")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed);
  auto* gen_length_opt = gen->add_option("--length", gen_length);
  gen->add_option("--repetitions", gen_reps, "apply the Long protocol with R repetitions");

  // extend
  auto* ext = app.add_subcommand("extend", "apply the Long repetition protocol to a sequence");
  std::string ext_in, ext_out;
  int ext_reps = 5;
  ext->add_option("--in", ext_in)->required();
  ext->add_option("--out", ext_out)->required();
  ext->add_option("--repetitions", ext_reps, "R")->capture_default_str();

  // track
  auto* track = app.add_subcommand("track", "run one tracker on one sequence");
  std::string track_config, track_seq, track_out, track_name = "siamese-no-update", track_gate;
  TrackerFlags track_flags;
  track->add_option("--config", track_config);
  track->add_option("--sequence", track_seq)->required();
  track->add_option("--tracker", track_name)->capture_default_str();
  track->add_option("--gate", track_gate, "gate checkpoint");
  track->add_option("--out", track_out)->required();
  track_flags.add(track);

  // train-gate
  auto* tg = app.add_subcommand("train-gate", "train the decay gate on held-out sequences");
  std::string tg_config, tg_out;
  std::vector<std::string> tg_seqs;
  std::optional<int> tg_steps, tg_window, tg_batch;
  std::optional<double> tg_lr;
  std::optional<std::uint64_t> tg_seed;
  tg->add_option("--config", tg_config);
  tg->add_option("--sequences", tg_seqs, "sequence directories")->required();
  tg->add_option("--out", tg_out, "checkpoint path")->required();
  auto* tg_steps_opt = tg->add_option("--steps", tg_steps);
  auto* tg_window_opt = tg->add_option("--window", tg_window, "K");
  auto* tg_batch_opt = tg->add_option("--batch", tg_batch);
  auto* tg_lr_opt = tg->add_option("--lr", tg_lr);
  auto* tg_seed_opt = tg->add_option("--seed", tg_seed);

  // bench
  auto* bench = app.add_subcommand("bench", "run a tracker roster over a corpus and write report tables");
  std::string bench_config, bench_out, bench_gate;
  std::vector<std::string> bench_roster;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_reps;
  TrackerFlags bench_flags;
  bench->add_option("--config", bench_config, "benchmark config JSON")->required();
  auto* bench_out_opt = bench->add_option("--out", bench_out);
  auto* bench_gate_opt = bench->add_option("--gate", bench_gate);
  auto* bench_roster_opt = bench->add_option("--roster", bench_roster);
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed);
  auto* bench_reps_opt = bench->add_option("--repetitions", bench_reps);
  bench_flags.add(bench);

  // dynamics
  auto* dyn = app.add_subcommand("dynamics", "Monte-Carlo model-decay experiments");
  std::string dyn_config, dyn_out;
  std::vector<double> dyn_sigmas;
  std::optional<int> dyn_seeds, dyn_length;
  std::optional<double> dyn_eta;
  std::optional<std::uint64_t> dyn_seed;
  dyn->add_option("--config", dyn_config);
  auto* dyn_out_opt = dyn->add_option("--out", dyn_out);
  auto* dyn_sigmas_opt = dyn->add_option("--sigmas", dyn_sigmas)->delimiter(',');
  auto* dyn_seeds_opt = dyn->add_option("--seeds", dyn_seeds);
  auto* dyn_eta_opt = dyn->add_option("--eta", dyn_eta);
  auto* dyn_seed_opt = dyn->add_option("--seed", dyn_seed);
  auto* dyn_length_opt = dyn->add_option("--length", dyn_length);

  // eval
  auto* ev = app.add_subcommand("eval", "score a prediction CSV against a sequence");
  std::string ev_seq, ev_pred, ev_out, ev_curve;
  bool ev_exclude = false;
  ev->add_option("--sequence", ev_seq)->required();
  ev->add_option("--predictions", ev_pred)->required();
  ev->add_option("--out", ev_out, "report JSON (stdout if omitted)");
  ev->add_option("--curve", ev_curve, "curve CSV");
  ev->add_flag("--exclude-absent", ev_exclude, "drop correctly-absent frames instead of crediting them");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const json j = load_json(gen_config);
      SequenceConfig cfg;
      if (!j.empty()) j.get_to(cfg);
      override(gen_seed_opt, gen_seed, cfg.seed);
      override(gen_length_opt, gen_length, cfg.length);
      Sequence s = generate_sequence(cfg);
      const int reps = gen_reps.value_or(j.value("repetitions", 1));
      if (reps > 1) s = extend_long(s, reps);
      write_sequence(s, gen_out);
      std::printf("wrote %zu frames to %s\n", s.size(), gen_out.c_str());
    } else if (*ext) {
      const Sequence s = extend_long(read_sequence(ext_in), ext_reps);
      write_sequence(s, ext_out);
      std::printf("wrote %zu frames to %s\n", s.size(), ext_out.c_str());
    } else if (*track) {
      const json j = load_json(track_config);
      TrackerOptions opts;
      apply_tracker_flags(opts, j);
      track_flags.apply(opts);
      if (track_gate.empty()) track_gate = j.value("gate_checkpoint", std::string{});
      std::shared_ptr<const GateClassifier> gate;
      if (!track_gate.empty()) gate = std::make_shared<const GateClassifier>(load_gate(track_gate));
      const Sequence s = read_sequence(track_seq);
      TrackResult r = run_tracker(track_name, s, opts, gate);
      r.name = fs::path(track_seq).filename().string();
      fs::create_directories(track_out);
      const EvalReport rep = evaluate(r);
      write_predictions_csv(r, fs::path(track_out) / "predictions.csv");
      write_report_json(rep, fs::path(track_out) / "report.json");
      write_curve_csv(rep, fs::path(track_out) / "curve.csv");
      std::printf("%s on %s: auc %.4f\n", track_name.c_str(), r.name.c_str(), rep.auc);
    } else if (*tg) {
      const json j = load_json(tg_config);
      GateCorpusTraining setup;
      TrackerOptions opts;
      apply_tracker_flags(opts, j);
      setup.base_trackers = j.value("base_trackers", setup.base_trackers);
      setup.window = j.value("window", setup.window);
      setup.init_seed = j.value("seed", setup.init_seed);
      setup.training.steps = j.value("steps", setup.training.steps);
      setup.training.batch = j.value("batch", setup.training.batch);
      setup.training.lr = j.value("lr", setup.training.lr);
      setup.training.momentum = j.value("momentum", setup.training.momentum);
      setup.training.target_loss = j.value("target_loss", setup.training.target_loss);
      override(tg_steps_opt, tg_steps, setup.training.steps);
      override(tg_window_opt, tg_window, setup.window);
      override(tg_batch_opt, tg_batch, setup.training.batch);
      override(tg_lr_opt, tg_lr, setup.training.lr);
      override(tg_seed_opt, tg_seed, setup.init_seed);
      setup.training.seed = derive_seed(setup.init_seed, "gate-training");
      GateTrainingReport rep;
      std::size_t n = 0;
      const GateClassifier c = train_gate_on_corpus(read_sequences(tg_seqs), opts, setup, &rep, &n);
      save_gate(c, tg_out);
      std::printf("trained on %zu windows, %zu steps, final batch loss %.4f\n", n, rep.losses.size(),
                  rep.losses.empty() ? 0.0 : rep.losses.back());
    } else if (*bench) {
      BenchmarkConfig cfg = benchmark_config_from_json(load_json(bench_config));
      if (bench_out_opt->count()) cfg.output_dir = bench_out;
      if (bench_gate_opt->count()) cfg.gate_checkpoint = bench_gate;
      if (bench_roster_opt->count()) cfg.roster = bench_roster;
      override(bench_reps_opt, bench_reps, cfg.repetitions);
      if (bench_seed_opt->count()) {
        // Re-derive unseeded sequences from the new root seed.
        json j = load_json(bench_config);
        j["seed"] = *bench_seed;
        const auto out = cfg.output_dir;
        const auto gate = cfg.gate_checkpoint;
        const auto roster = cfg.roster;
        const int reps = cfg.repetitions;
        cfg = benchmark_config_from_json(j);
        cfg.output_dir = out;
        cfg.gate_checkpoint = gate;
        cfg.roster = roster;
        cfg.repetitions = reps;
      }
      bench_flags.apply(cfg.options);
      const BenchmarkResults r = run_benchmark(cfg);
      for (std::size_t t = 0; t < r.trackers.size(); ++t)
        std::printf("%-28s auc %.4f\n", r.trackers[t].c_str(), mean_auc(r, t));
    } else if (*dyn) {
      const json j = load_json(dyn_config);
      DynamicsConfig cfg;
      try {
        if (j.contains("sequence")) j.at("sequence").get_to(cfg.sequence);
        cfg.sigmas = j.value("sigmas", cfg.sigmas);
        cfg.seeds = j.value("seeds", cfg.seeds);
        cfg.root_seed = j.value("seed", cfg.root_seed);
        cfg.eta = j.value("eta", cfg.eta);
        cfg.experiment.patch_side = j.value("patch_side", cfg.experiment.patch_side);
        cfg.experiment.window = j.value("window", cfg.experiment.window);
        cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
      } catch (const json::exception& e) {
        throw ConfigError(std::string("dynamics config: ") + e.what());
      }
      if (dyn_out_opt->count()) cfg.output_dir = dyn_out;
      if (dyn_sigmas_opt->count()) cfg.sigmas = dyn_sigmas;
      override(dyn_seeds_opt, dyn_seeds, cfg.seeds);
      override(dyn_eta_opt, dyn_eta, cfg.eta);
      override(dyn_seed_opt, dyn_seed, cfg.root_seed);
      override(dyn_length_opt, dyn_length, cfg.sequence.length);
      const auto rows = run_dynamics(cfg);
      for (double sigma : cfg.sigmas) {
        double s = 0.0;
        int n = 0;
        for (const auto& r : rows)
          if (r.sigma == sigma) {
            s += r.terminal_cum_bias;
            ++n;
          }
        std::printf("sigma %-6g mean terminal cumulative bias %.6g\n", sigma, s / n);
      }
    } else if (*ev) {
      const Sequence s = read_sequence(ev_seq);
      TrackResult r;
      r.truth = s.truth;
      r.tags = s.tags;
      r.repetition_boundaries = s.repetition_boundaries;
      read_predictions_csv(ev_pred, r);
      if (r.predictions.size() != r.truth.size())
        throw DataError("prediction CSV has " + std::to_string(r.predictions.size()) + " rows, sequence has " +
                        std::to_string(r.truth.size()) + " frames");
      const EvalReport rep = evaluate(r, ev_exclude ? AbsenceMode::Exclude : AbsenceMode::Credit);
      if (ev_out.empty()) std::cout << report_to_json(rep).dump(2) << '\n';
      else write_report_json(rep, ev_out);
      if (!ev_curve.empty()) write_curve_csv(rep, ev_curve);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "decaylab: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "decaylab: invalid input: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "decaylab: %s\n", e.what());
    return 2;
  }
  return 0;
}
