#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "decaylab/error.hpp"
#include "decaylab/harness.hpp"

using namespace decaylab;
namespace fs = std::filesystem;

namespace {

SequenceConfig small_config(std::uint64_t seed, int length = 30) {
  SequenceConfig c;
  c.width = 160;
  c.height = 120;
  c.length = length;
  c.seed = seed;
  c.target_size = 20;
  c.motion.velocity = 1.0;
  c.motion.jitter_sd = 0.2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative path -> contents for every regular file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("decaylab_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("every roster name maps to one configuration") {
  const auto& roster = tracker_roster();
  CHECK(roster.size() == 7);
  TrackerOptions o;
  for (const auto& name : roster) {
    if (name == "mosse") {
      CHECK_THROWS_AS(longterm_config(name, o), ConfigError);
      continue;
    }
    CHECK_NOTHROW(longterm_config(name, o));
  }
  CHECK(longterm_config("siamese-no-update", o).policy == UpdatePolicy::None);
  CHECK(longterm_config("siamese-no-update", o).siamese.global_interval == 15);
  CHECK(longterm_config("siamese-local-only", o).siamese.global_interval == 0);
  CHECK(longterm_config("siamese-global-only", o).siamese.global_interval == 1);
  CHECK(longterm_config("hybrid-blind-update", o).policy == UpdatePolicy::Blind);
  CHECK(longterm_config("hybrid-sim-threshold-update", o).policy == UpdatePolicy::SimilarityThreshold);
  CHECK(longterm_config("hybrid-gated", o).policy == UpdatePolicy::Gated);
  CHECK(tracker_needs_gate("hybrid-gated"));
  CHECK_FALSE(tracker_needs_gate("hybrid-blind-update"));
  CHECK_THROWS_AS(longterm_config("kcf", o), ConfigError);
}

TEST_CASE("run_tracker reports frame 0 as the init box") {
  const Sequence seq = generate_sequence(small_config(3, 12));
  for (const std::string name : {"siamese-no-update", "mosse"}) {
    const TrackResult r = run_tracker(name, seq, {});
    REQUIRE(r.predictions.size() == seq.size());
    CHECK(r.predictions[0] == seq.truth[0]);
    CHECK(r.scores[0] == 1.0);
    CHECK(r.truth == seq.truth);
  }
  CHECK_THROWS_AS(run_tracker("hybrid-gated", seq, {}), ConfigError);
}

TEST_CASE("gated update with threshold 1 never fires and matches no-update") {
  ChallengeEvent ov;
  ov.kind = ChallengeTag::OV;
  ov.start = 10;
  ov.end = 16;
  SequenceConfig c = small_config(5, 40);
  c.events = {ov};
  const Sequence seq = generate_sequence(c);
  TrackerOptions o;
  o.gate_threshold = 1.0;
  o.restrict_to_global = false;
  auto gate = std::make_shared<const GateClassifier>(make_gate(3));
  const TrackResult gated = run_tracker("hybrid-gated", seq, o, gate);
  const TrackResult none = run_tracker("siamese-no-update", seq, o);
  CHECK(gated.predictions == none.predictions);
  CHECK(gated.scores == none.scores);
  CHECK(gated.search_kinds == none.search_kinds);
}

TEST_CASE("blind updates change the trajectory") {
  const Sequence seq = generate_sequence(small_config(8, 30));
  TrackerOptions o;
  o.alpha = 0.5;
  const TrackResult blind = run_tracker("hybrid-blind-update", seq, o);
  const TrackResult none = run_tracker("siamese-no-update", seq, o);
  CHECK(blind.scores != none.scores);
}

TEST_CASE("benchmark config parsing") {
  const nlohmann::json j = {
      {"seed", 9},
      {"repetitions", 2},
      {"roster", {"siamese-no-update", "mosse"}},
      {"output_dir", "somewhere"},
      {"tracker", {{"global_interval", 10}, {"alpha", 0.2}}},
      {"corpus", {{{"name", "a"}, {"length", 20}, {"seed", 4}}, {{"length", 25}}}},
  };
  const BenchmarkConfig cfg = benchmark_config_from_json(j);
  CHECK(cfg.seed == 9);
  CHECK(cfg.repetitions == 2);
  CHECK(cfg.roster.size() == 2);
  CHECK(cfg.output_dir == fs::path("somewhere"));
  CHECK(cfg.options.global_interval == 10);
  CHECK(cfg.options.alpha == 0.2);
  REQUIRE(cfg.corpus.size() == 2);
  CHECK(cfg.corpus[0].name == "a");
  CHECK(cfg.corpus[0].config.seed == 4);
  CHECK(cfg.corpus[1].name == "seq001");
  CHECK(cfg.corpus[1].config.seed == derive_seed(9, "seq001"));
  CHECK(cfg.corpus[1].config.length == 25);

  nlohmann::json bad = j;
  bad["roster"] = {"nope"};
  CHECK_THROWS_AS(benchmark_config_from_json(bad), ConfigError);
  bad = j;
  bad["corpus"][1]["name"] = "a";
  CHECK_THROWS_AS(benchmark_config_from_json(bad), ConfigError);
  bad = j;
  bad["repetitions"] = 0;
  CHECK_THROWS_AS(benchmark_config_from_json(bad), ConfigError);
}

TEST_CASE("build_corpus applies the Long protocol") {
  BenchmarkConfig cfg;
  cfg.corpus = {{"a", small_config(1, 10)}};
  cfg.repetitions = 3;
  const auto corpus = build_corpus(cfg);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].size() == (2 * 10 - 2) * 3 + 1);
  CHECK(corpus[0].repetition_boundaries == std::vector<int>{0, 18, 36});
}

TEST_CASE("run_benchmark writes the output tree and is byte-identical across runs") {
  BenchmarkConfig cfg;
  cfg.corpus = {{"s0", small_config(21, 12)}, {"s1", small_config(22, 12)}};
  cfg.repetitions = 2;
  cfg.roster = {"siamese-no-update", "siamese-local-only", "mosse"};
  cfg.output_dir = scratch("bench_a");
  run_benchmark(cfg);
  const auto a = snapshot(cfg.output_dir);
  for (const auto& t : cfg.roster)
    for (const std::string s : {"s0", "s1"})
      for (const std::string f : {"predictions.csv", "report.json", "curve.csv"}) CHECK(a.count(t + "/" + s + "/" + f) == 1);
  for (const std::string f : {"ablation.csv", "search.csv", "challenge.csv", "repetition.csv"}) CHECK(a.count("tables/" + f) == 1);
  CHECK(a.at("tables/ablation.csv").rfind("tracker,sequences,auc,tpr,precision,recall,f\n", 0) == 0);

  cfg.output_dir = scratch("bench_b");
  run_benchmark(cfg);
  CHECK(snapshot(cfg.output_dir) == a);
  fs::remove_all(scratch("bench_a"));
  fs::remove_all(scratch("bench_b"));
}

TEST_CASE("run_benchmark errors") {
  BenchmarkConfig cfg;
  cfg.corpus = {{"s0", small_config(1, 8)}};
  cfg.roster = {"hybrid-gated"};
  cfg.output_dir = scratch("bench_err");
  cfg.gate_checkpoint = scratch("no_such_gate.json");
  CHECK_THROWS_AS(run_benchmark(cfg), ConfigError);
  cfg.gate_checkpoint.clear();
  CHECK_THROWS_AS(run_benchmark(cfg), ConfigError);

  // A regular file where the output directory should be.
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  cfg.roster = {"mosse"};
  cfg.output_dir = blocker / "out";
  CHECK_THROWS_AS(run_benchmark(cfg), Error);
  fs::remove_all(blocker);
}

TEST_CASE("dynamics sweep") {
  DynamicsConfig cfg;
  cfg.sequence = small_config(2, 30);
  cfg.seeds = 3;
  cfg.write_traces = false;

  SUBCASE("sigma = 0 gives zero cumulative bias") {
    cfg.sigmas = {0.0};
    for (const auto& row : run_dynamics(cfg)) CHECK(row.terminal_cum_bias == 0.0);
  }
  SUBCASE("eta = 0 keeps the prediction error at its initial value") {
    cfg.sigmas = {1.0};
    cfg.eta = 0.0;
    cfg.sequence.motion.velocity = 0.0;
    cfg.sequence.motion.jitter_sd = 0.0;
    std::vector<DecayTrace> traces;
    run_dynamics(cfg, &traces);
    REQUIRE(!traces.empty());
    for (const auto& tr : traces)
      for (const auto& row : tr.rows) CHECK(row.pred_error == tr.rows.front().pred_error);
  }
  SUBCASE("pairs share a seed across sigmas; rows are ordered by sigma then seed") {
    cfg.sigmas = {0.5, 2.0};
    const auto rows = run_dynamics(cfg);
    REQUIRE(rows.size() == 6);
    for (int k = 0; k < 3; ++k) {
      CHECK(rows[k].sigma == 0.5);
      CHECK(rows[3 + k].sigma == 2.0);
      CHECK(rows[k].seed == rows[3 + k].seed);
      CHECK(rows[k].seed == derive_seed(cfg.root_seed, static_cast<std::uint64_t>(k)));
    }
  }
  SUBCASE("files are written and reproducible") {
    cfg.sigmas = {0.0, 1.0};
    cfg.seeds = 2;
    cfg.write_traces = true;
    cfg.output_dir = scratch("dyn_a");
    run_dynamics(cfg);
    const auto a = snapshot(cfg.output_dir);
    CHECK(a.count("summary.csv") == 1);
    CHECK(a.count("trace_sigma1_seed001.csv") == 1);
    CHECK(a.size() == 5);
    cfg.output_dir = scratch("dyn_b");
    run_dynamics(cfg);
    CHECK(snapshot(cfg.output_dir) == a);
    fs::remove_all(scratch("dyn_a"));
    fs::remove_all(scratch("dyn_b"));
  }
  SUBCASE("invalid schedule") {
    cfg.sigmas = {-1.0};
    CHECK_THROWS(run_dynamics(cfg));
    cfg.sigmas = {};
    CHECK_THROWS(run_dynamics(cfg));
  }
}
