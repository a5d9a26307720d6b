#pragma once

// Experiment orchestration: named tracker ablations, corpus runs with report
// tables, and Monte-Carlo decay-dynamics sweeps. Everything is a pure
// function of the configuration and its seeds.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decaylab/decaygate.hpp"
#include "decaylab/dynamics.hpp"
#include "decaylab/eval.hpp"
#include "decaylab/longterm.hpp"
#include "decaylab/mosse.hpp"
#include "decaylab/synthvid.hpp"

namespace decaylab {

/// siamese-no-update, siamese-local-only, siamese-global-only,
/// hybrid-blind-update, hybrid-sim-threshold-update, hybrid-gated, mosse.
const std::vector<std::string>& tracker_roster();
bool tracker_needs_gate(const std::string& name);

struct TrackerOptions {
  int global_interval = 15;  // T for the hybrid variants
  double alpha = 0.1;
  double sim_threshold = 0.5;
  double gate_threshold = 0.9;
  bool restrict_to_global = true;
  MosseConfig mosse;
};

/// Siamese configuration of a named ablation. Throws ConfigError for an
/// unknown name or for "mosse".
LongTermConfig longterm_config(const std::string& tracker, const TrackerOptions& opts);

/// Runs a tracker over a sequence initialised on frame 0's truth. Frame 0 is
/// reported as the init box with score 1. If `record` is given it receives
/// per-frame gate inputs, predictions and truth (siamese variants only).
TrackResult run_tracker(const std::string& tracker, const Sequence& seq, const TrackerOptions& opts,
                        std::shared_ptr<const GateClassifier> gate = nullptr, TrackRecord* record = nullptr);

struct CorpusEntry {
  std::string name;
  SequenceConfig config;
};

struct BenchmarkConfig {
  std::vector<CorpusEntry> corpus;
  int repetitions = 1;  // R; > 1 applies the Long repetition protocol
  std::vector<std::string> roster;
  std::filesystem::path gate_checkpoint;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  TrackerOptions options;
};

/// Reads a benchmark JSON config. Sequences without a "seed" get one derived
/// from the root seed and their name.
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);

struct BenchmarkResults {
  std::vector<std::string> trackers;
  std::vector<std::string> sequences;
  std::vector<std::vector<TrackResult>> results;  // [tracker][sequence]
  std::vector<std::vector<EvalReport>> reports;
};

/// Materialises the corpus (generation plus the Long protocol).
std::vector<Sequence> build_corpus(const BenchmarkConfig& cfg);

BenchmarkResults evaluate_roster(const std::vector<std::string>& roster, const std::vector<Sequence>& corpus,
                                 const std::vector<std::string>& names, const TrackerOptions& opts,
                                 std::shared_ptr<const GateClassifier> gate);

/// Mean per-repetition AUC over the sequences of one tracker.
std::vector<double> mean_repetition_curve(const BenchmarkResults& r, std::size_t tracker);
double mean_auc(const BenchmarkResults& r, std::size_t tracker);

/// Writes out/<tracker>/<sequence>/{predictions.csv,report.json,curve.csv}
/// and out/tables/{ablation,search,challenge,repetition}.csv.
BenchmarkResults run_benchmark(const BenchmarkConfig& cfg);
void write_tables(const BenchmarkResults& r, const std::filesystem::path& dir);

struct GateCorpusTraining {
  // Windows from every (tracker, sequence) run are pooled. A drifting tracker
  // supplies failure windows; a stable one supplies success windows.
  std::vector<std::string> base_trackers{"siamese-no-update", "hybrid-blind-update"};
  int window = 8;
  std::uint64_t init_seed = 11;
  GateTrainingOptions training;
};

/// Tracks every sequence with each base tracker, labels windows by IoU and
/// trains a freshly initialised gate on them.
GateClassifier train_gate_on_corpus(const std::vector<Sequence>& corpus, const TrackerOptions& opts,
                                    const GateCorpusTraining& setup, GateTrainingReport* report = nullptr,
                                    std::size_t* windows = nullptr);

struct DynamicsConfig {
  SequenceConfig sequence;
  std::vector<double> sigmas{0.0, 0.5, 1.0, 2.0};
  int seeds = 30;
  std::uint64_t root_seed = 1;
  double eta = 0.05;
  DecayExperimentOptions experiment;
  std::filesystem::path output_dir = "out/dynamics";
  bool write_traces = true;
};

struct DynamicsSummaryRow {
  double sigma = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double terminal_cum_bias = 0.0;
  double terminal_cum_perfect = 0.0;
  double final_loss = 0.0;
  double initial_pred_error = 0.0;
  double final_pred_error = 0.0;
};

/// One decay experiment per (sigma, seed index); seed k is
/// derive_seed(root_seed, k), shared across sigmas so runs are paired.
std::vector<DynamicsSummaryRow> run_dynamics(const DynamicsConfig& cfg, std::vector<DecayTrace>* traces = nullptr);
void write_dynamics_summary(const std::vector<DynamicsSummaryRow>& rows, const std::filesystem::path& path);

}  // namespace decaylab
