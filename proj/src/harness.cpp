#include "decaylab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "decaylab/error.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

const std::vector<std::string>& tracker_roster() {
  static const std::vector<std::string> r{"siamese-no-update",   "siamese-local-only",          "siamese-global-only",
                                          "hybrid-blind-update", "hybrid-sim-threshold-update", "hybrid-gated",
                                          "mosse"};
  return r;
}

bool tracker_needs_gate(const std::string& name) { return name == "hybrid-gated"; }

LongTermConfig longterm_config(const std::string& tracker, const TrackerOptions& opts) {
  LongTermConfig c;
  c.alpha = opts.alpha;
  c.sim_threshold = opts.sim_threshold;
  c.gate_threshold = opts.gate_threshold;
  c.restrict_to_global = opts.restrict_to_global;
  c.siamese.global_interval = opts.global_interval;
  if (tracker == "siamese-no-update") {
  } else if (tracker == "siamese-local-only") {
    c.siamese.global_interval = 0;
  } else if (tracker == "siamese-global-only") {
    c.siamese.global_interval = 1;
  } else if (tracker == "hybrid-blind-update") {
    c.policy = UpdatePolicy::Blind;
  } else if (tracker == "hybrid-sim-threshold-update") {
    c.policy = UpdatePolicy::SimilarityThreshold;
  } else if (tracker == "hybrid-gated") {
    c.policy = UpdatePolicy::Gated;
  } else {
    throw ConfigError("unknown siamese tracker '" + tracker + "'");
  }
  return c;
}

TrackResult run_tracker(const std::string& tracker, const Sequence& seq, const TrackerOptions& opts,
                        std::shared_ptr<const GateClassifier> gate, TrackRecord* record) {
  if (seq.frames.empty()) throw DataError("empty sequence");
  if (!seq.truth.front().present) throw DataError("first frame has no target box to initialise from");
  TrackResult r;
  r.truth = seq.truth;
  r.tags = seq.tags;
  r.repetition_boundaries = seq.repetition_boundaries;
  r.predictions.push_back(seq.truth.front());
  r.scores.push_back(1.0);
  r.search_kinds.push_back(SearchKind::Local);
  if (record) {
    *record = {};
    record->maps.push_back(Grid(kGateMapSize, kGateMapSize));
    record->predictions.push_back(seq.truth.front());
    record->truth = seq.truth;
  }

  auto push = [&](const Prediction& p) {
    r.predictions.push_back(p.box);
    r.scores.push_back(p.score);
    r.search_kinds.push_back(p.search_kind);
    if (record) {
      record->maps.push_back(gate_input(p.map));
      record->predictions.push_back(p.box);
    }
  };

  if (tracker == "mosse") {
    MosseState s = mosse_init(seq.frames.front(), seq.truth.front(), opts.mosse);
    for (std::size_t i = 1; i < seq.frames.size(); ++i) push(mosse_step(s, seq.frames[i]));
    return r;
  }
  if (tracker_needs_gate(tracker) && !gate) throw ConfigError(tracker + " needs a gate checkpoint");
  LongTermTracker t(seq.frames.front(), seq.truth.front(), longterm_config(tracker, opts),
                    tracker_needs_gate(tracker) ? gate : nullptr);
  for (std::size_t i = 1; i < seq.frames.size(); ++i) push(t.step(seq.frames[i]).prediction);
  return r;
}

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  BenchmarkConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.repetitions = j.value("repetitions", c.repetitions);
    if (j.contains("roster")) c.roster = j.at("roster").get<std::vector<std::string>>();
    else c.roster = tracker_roster();
    c.gate_checkpoint = j.value("gate_checkpoint", std::string{});
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("tracker")) {
      const auto& t = j.at("tracker");
      c.options.global_interval = t.value("global_interval", c.options.global_interval);
      c.options.alpha = t.value("alpha", c.options.alpha);
      c.options.sim_threshold = t.value("sim_threshold", c.options.sim_threshold);
      c.options.gate_threshold = t.value("gate_threshold", c.options.gate_threshold);
      c.options.restrict_to_global = t.value("restrict_to_global", c.options.restrict_to_global);
    }
    int idx = 0;
    for (const auto& s : j.at("corpus")) {
      CorpusEntry e;
      char buf[32];
      std::snprintf(buf, sizeof buf, "seq%03d", idx++);
      e.name = s.value("name", std::string(buf));
      s.get_to(e.config);
      if (!s.contains("seed")) e.config.seed = derive_seed(c.seed, e.name);
      c.corpus.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("benchmark config: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& e : c.corpus)
    if (!names.insert(e.name).second) throw ConfigError("duplicate sequence name '" + e.name + "'");
  for (const auto& t : c.roster)
    if (std::find(tracker_roster().begin(), tracker_roster().end(), t) == tracker_roster().end())
      throw ConfigError("unknown tracker '" + t + "' in roster");
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  return c;
}

std::vector<Sequence> build_corpus(const BenchmarkConfig& cfg) {
  std::vector<Sequence> out(cfg.corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cfg.corpus.size(); ++i) {
    Sequence s = generate_sequence(cfg.corpus[i].config);
    out[i] = cfg.repetitions > 1 ? extend_long(s, cfg.repetitions) : std::move(s);
  }
  return out;
}

BenchmarkResults evaluate_roster(const std::vector<std::string>& roster, const std::vector<Sequence>& corpus,
                                 const std::vector<std::string>& names, const TrackerOptions& opts,
                                 std::shared_ptr<const GateClassifier> gate) {
  if (names.size() != corpus.size()) throw std::invalid_argument("evaluate_roster: one name per sequence");
  for (const auto& t : roster)
    if (tracker_needs_gate(t) && !gate) throw ConfigError(t + " needs a gate checkpoint");
  BenchmarkResults r;
  r.trackers = roster;
  r.sequences = names;
  const std::size_t nt = roster.size(), ns = corpus.size();
  r.results.assign(nt, std::vector<TrackResult>(ns));
  r.reports.assign(nt, std::vector<EvalReport>(ns));
  // Each (tracker, sequence) pair is independent; results land in fixed slots.
  std::vector<std::exception_ptr> errors(nt * ns);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < nt * ns; ++k) {
    const std::size_t t = k / ns, s = k % ns;
    try {
      r.results[t][s] = run_tracker(roster[t], corpus[s], opts, gate);
      r.results[t][s].name = names[s];
      r.reports[t][s] = evaluate(r.results[t][s]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return r;
}

double mean_auc(const BenchmarkResults& r, std::size_t tracker) {
  double s = 0.0;
  for (const auto& rep : r.reports.at(tracker)) s += rep.auc;
  return r.reports[tracker].empty() ? 0.0 : s / static_cast<double>(r.reports[tracker].size());
}

std::vector<double> mean_repetition_curve(const BenchmarkResults& r, std::size_t tracker) {
  std::vector<double> sum;
  std::vector<int> count;
  for (const auto& rep : r.reports.at(tracker)) {
    if (rep.per_repetition.size() > sum.size()) {
      sum.resize(rep.per_repetition.size(), 0.0);
      count.resize(rep.per_repetition.size(), 0);
    }
    for (std::size_t k = 0; k < rep.per_repetition.size(); ++k) {
      sum[k] += rep.per_repetition[k];
      ++count[k];
    }
  }
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= count[k];
  return sum;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

const char* search_strategy(const std::string& tracker) {
  if (tracker == "siamese-local-only") return "local";
  if (tracker == "siamese-global-only") return "global";
  if (tracker == "mosse") return "local";
  return "hybrid";
}

}  // namespace

void write_tables(const BenchmarkResults& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "ablation.csv");
    out << "tracker,sequences,auc,tpr,precision,recall,f\n";
    for (std::size_t t = 0; t < r.trackers.size(); ++t) {
      double tpr_sum = 0.0, p = 0.0, rc = 0.0, f = 0.0;
      int tpr_n = 0;
      for (const auto& rep : r.reports[t]) {
        if (!std::isnan(rep.tpr)) {
          tpr_sum += rep.tpr;
          ++tpr_n;
        }
        p += rep.prf.precision;
        rc += rep.prf.recall;
        f += rep.prf.f;
      }
      const double n = static_cast<double>(r.reports[t].size());
      out << r.trackers[t] << ',' << r.reports[t].size() << ',' << fmt(mean_auc(r, t)) << ','
          << fmt(tpr_n ? tpr_sum / tpr_n : 0.0) << ',' << fmt(p / n) << ',' << fmt(rc / n) << ',' << fmt(f / n) << '\n';
    }
  }
  {
    auto out = open_out(dir / "search.csv");
    out << "tracker,search,auc,global_frames,frames\n";
    for (std::size_t t = 0; t < r.trackers.size(); ++t) {
      std::size_t global = 0, frames = 0;
      for (const auto& res : r.results[t]) {
        frames += res.search_kinds.size();
        for (auto k : res.search_kinds) global += k == SearchKind::Global;
      }
      out << r.trackers[t] << ',' << search_strategy(r.trackers[t]) << ',' << fmt(mean_auc(r, t)) << ',' << global
          << ',' << frames << '\n';
    }
  }
  {
    auto out = open_out(dir / "challenge.csv");
    out << "tracker,tag,auc,sequences\n";
    for (std::size_t t = 0; t < r.trackers.size(); ++t) {
      const auto table = per_challenge_report(r.results[t]);
      std::map<ChallengeTag, int> counts;
      for (const auto& res : r.results[t])
        for (auto tag : res.tags) ++counts[tag];
      for (const auto& [tag, v] : table)
        out << r.trackers[t] << ',' << to_string(tag) << ',' << fmt(v) << ',' << counts[tag] << '\n';
    }
  }
  {
    auto out = open_out(dir / "repetition.csv");
    out << "tracker,repetition,auc\n";
    for (std::size_t t = 0; t < r.trackers.size(); ++t) {
      const auto curve = mean_repetition_curve(r, t);
      for (std::size_t k = 0; k < curve.size(); ++k) out << r.trackers[t] << ',' << k + 1 << ',' << fmt(curve[k]) << '\n';
    }
  }
}

BenchmarkResults run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.roster.empty()) throw ConfigError("empty tracker roster");
  std::shared_ptr<const GateClassifier> gate;
  bool gated = false;
  for (const auto& t : cfg.roster) gated |= tracker_needs_gate(t);
  if (gated) {
    if (cfg.gate_checkpoint.empty()) throw ConfigError("roster includes hybrid-gated but no gate checkpoint is set");
    gate = std::make_shared<const GateClassifier>(load_gate(cfg.gate_checkpoint));
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  const auto corpus = build_corpus(cfg);
  std::vector<std::string> names;
  for (const auto& e : cfg.corpus) names.push_back(e.name);
  BenchmarkResults r = evaluate_roster(cfg.roster, corpus, names, cfg.options, gate);

  for (std::size_t t = 0; t < r.trackers.size(); ++t)
    for (std::size_t s = 0; s < names.size(); ++s) {
      const auto dir = cfg.output_dir / r.trackers[t] / names[s];
      std::filesystem::create_directories(dir);
      write_predictions_csv(r.results[t][s], dir / "predictions.csv");
      write_report_json(r.reports[t][s], dir / "report.json");
      write_curve_csv(r.reports[t][s], dir / "curve.csv");
    }
  write_tables(r, cfg.output_dir / "tables");
  return r;
}

GateClassifier train_gate_on_corpus(const std::vector<Sequence>& corpus, const TrackerOptions& opts,
                                    const GateCorpusTraining& setup, GateTrainingReport* report, std::size_t* windows) {
  if (setup.base_trackers.empty()) throw ConfigError("gate training needs at least one base tracker");
  for (const auto& t : setup.base_trackers) {
    longterm_config(t, opts);
    if (tracker_needs_gate(t)) throw ConfigError("gate training needs siamese base trackers without a gate");
  }
  const std::size_t jobs = setup.base_trackers.size() * corpus.size();
  std::vector<std::vector<GateWindow>> per_job(jobs);
  std::vector<std::exception_ptr> errors(jobs);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < jobs; ++i) {
    try {
      TrackRecord rec;
      run_tracker(setup.base_trackers[i / corpus.size()], corpus[i % corpus.size()], opts, nullptr, &rec);
      per_job[i] = build_training_set(rec, setup.window);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<GateWindow> data;
  for (auto& v : per_job)
    for (auto& w : v) data.push_back(std::move(w));
  if (windows) *windows = data.size();
  GateClassifier c = make_gate(setup.init_seed, setup.window);
  GateTrainingReport rep = train_gate(c, data, setup.training);
  if (report) *report = std::move(rep);
  return c;
}

std::vector<DynamicsSummaryRow> run_dynamics(const DynamicsConfig& cfg, std::vector<DecayTrace>* traces) {
  if (cfg.sigmas.empty()) throw ConfigError("dynamics: empty sigma grid");
  if (cfg.seeds < 1) throw ConfigError("dynamics: need at least one seed");
  for (double s : cfg.sigmas)
    if (!(s >= 0.0)) throw ConfigError("dynamics: sigma must be >= 0");
  if (cfg.write_traces) std::filesystem::create_directories(cfg.output_dir);

  const std::size_t nsig = cfg.sigmas.size(), nseed = static_cast<std::size_t>(cfg.seeds);
  std::vector<DynamicsSummaryRow> rows(nsig * nseed);
  std::vector<DecayTrace> all(nsig * nseed);
  std::vector<std::exception_ptr> errors(nseed);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < nseed; ++k) {
    try {
      const std::uint64_t seed = derive_seed(cfg.root_seed, static_cast<std::uint64_t>(k));
      SequenceConfig sc = cfg.sequence;
      sc.seed = derive_seed(seed, "video");
      const Sequence seq = generate_sequence(sc);
      for (std::size_t si = 0; si < nsig; ++si) {
        const double sigma = cfg.sigmas[si];
        DecayTrace tr = run_decay_experiment(seq, std::span<const double>(&sigma, 1), cfg.eta, seed, cfg.experiment);
        DynamicsSummaryRow row;
        row.sigma = sigma;
        row.seed_index = static_cast<int>(k);
        row.seed = seed;
        if (!tr.rows.empty()) {
          row.terminal_cum_bias = tr.rows.back().cum_bias;
          row.terminal_cum_perfect = tr.rows.back().cum_perfect;
          row.final_loss = tr.rows.back().loss;
          row.initial_pred_error = tr.rows.front().pred_error;
          row.final_pred_error = tr.rows.back().pred_error;
        }
        rows[si * nseed + k] = row;
        all[si * nseed + k] = std::move(tr);
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (cfg.write_traces) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "trace_sigma%g_seed%03d.csv", rows[i].sigma, rows[i].seed_index);
      write_trace_csv(all[i], cfg.output_dir / buf);
    }
    write_dynamics_summary(rows, cfg.output_dir / "summary.csv");
  }
  if (traces) *traces = std::move(all);
  return rows;
}

void write_dynamics_summary(const std::vector<DynamicsSummaryRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "sigma,seed_index,seed,terminal_cum_bias,terminal_cum_perfect,final_loss,initial_pred_error,final_pred_error\n";
  for (const auto& r : rows)
    out << fmt(r.sigma) << ',' << r.seed_index << ',' << r.seed << ',' << fmt(r.terminal_cum_bias) << ','
        << fmt(r.terminal_cum_perfect) << ',' << fmt(r.final_loss) << ',' << fmt(r.initial_pred_error) << ','
        << fmt(r.final_pred_error) << '\n';
}

}  // namespace decaylab
