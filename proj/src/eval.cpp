#include "decaylab/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "decaylab/error.hpp"

namespace decaylab {

std::vector<double> default_thresholds() {
  std::vector<double> t(21);
  for (int i = 0; i <= 20; ++i) t[i] = i * 0.05;
  return t;
}

double frame_iou(const Box& pred, const Box& truth) {
  if (!truth.present) return pred.present ? 0.0 : 1.0;
  if (!pred.present) return 0.0;
  return iou(pred, truth);
}

namespace {

void check_aligned(const TrackResult& r) {
  if (r.predictions.size() != r.truth.size())
    throw std::invalid_argument("track result: " + std::to_string(r.predictions.size()) + " predictions vs " +
                                std::to_string(r.truth.size()) + " truth boxes");
}

std::vector<double> span_curve(const TrackResult& r, std::size_t begin, std::size_t end,
                               const std::vector<double>& thresholds, AbsenceMode mode) {
  std::vector<double> ious;
  ious.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const Box& p = r.predictions[i];
    const Box& t = r.truth[i];
    if (mode == AbsenceMode::Exclude && !p.present && !t.present) continue;
    ious.push_back(frame_iou(p, t));
  }
  if (ious.empty()) throw std::invalid_argument("success curve over an empty frame set");
  std::vector<double> curve;
  curve.reserve(thresholds.size());
  for (double tau : thresholds) {
    std::size_t hits = 0;
    for (double v : ious) hits += v > tau || v == 1.0;
    curve.push_back(static_cast<double>(hits) / static_cast<double>(ious.size()));
  }
  return curve;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> success_curve(const TrackResult& r, const std::vector<double>& thresholds, AbsenceMode mode) {
  check_aligned(r);
  if (thresholds.empty()) throw std::invalid_argument("empty threshold grid");
  return span_curve(r, 0, r.truth.size(), thresholds, mode);
}

double auc(const TrackResult& r, AbsenceMode mode) { return mean(success_curve(r, default_thresholds(), mode)); }

double tpr(const TrackResult& r, double tau) {
  check_aligned(r);
  std::size_t visible = 0, hits = 0;
  for (std::size_t i = 0; i < r.truth.size(); ++i) {
    if (!r.truth[i].present) continue;
    ++visible;
    hits += r.predictions[i].present && iou(r.predictions[i], r.truth[i]) > tau;
  }
  if (visible == 0) throw std::invalid_argument("tpr: no frame with a visible target");
  return static_cast<double>(hits) / static_cast<double>(visible);
}

PrecisionRecall pr_f(const TrackResult& r, double tau) {
  check_aligned(r);
  std::size_t pred_n = 0, truth_n = 0, hits = 0;
  for (std::size_t i = 0; i < r.truth.size(); ++i) {
    const Box& p = r.predictions[i];
    const Box& t = r.truth[i];
    pred_n += p.present;
    truth_n += t.present;
    hits += p.present && t.present && iou(p, t) > tau;
  }
  PrecisionRecall out;
  out.precision = pred_n ? static_cast<double>(hits) / static_cast<double>(pred_n) : 0.0;
  out.recall = truth_n ? static_cast<double>(hits) / static_cast<double>(truth_n) : 0.0;
  const double s = out.precision + out.recall;
  out.f = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

std::map<ChallengeTag, double> per_challenge_report(const std::vector<TrackResult>& results, AbsenceMode mode) {
  std::map<ChallengeTag, std::vector<double>> acc;
  for (const auto& r : results) {
    const double a = auc(r, mode);
    for (ChallengeTag t : r.tags) acc[t].push_back(a);
  }
  std::map<ChallengeTag, double> out;
  for (const auto& [tag, v] : acc) out[tag] = mean(v);
  return out;
}

std::vector<double> per_repetition_curve(const TrackResult& r, AbsenceMode mode) {
  check_aligned(r);
  const auto& b = r.repetition_boundaries;
  const auto n = static_cast<long>(r.truth.size());
  if (b.empty()) throw std::invalid_argument("per-repetition curve needs repetition boundaries");
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k] < 0 || b[k] >= n) throw std::invalid_argument("repetition boundary " + std::to_string(b[k]) + " outside frame range");
    if (k > 0 && b[k] <= b[k - 1]) throw std::invalid_argument("repetition boundaries must be strictly increasing");
  }
  std::vector<double> out;
  const auto grid = default_thresholds();
  for (std::size_t k = 0; k < b.size(); ++k) {
    const std::size_t begin = static_cast<std::size_t>(b[k]);
    const std::size_t end = k + 1 < b.size() ? static_cast<std::size_t>(b[k + 1]) : r.truth.size();
    out.push_back(mean(span_curve(r, begin, end, grid, mode)));
  }
  return out;
}

EvalReport evaluate(const TrackResult& r, AbsenceMode mode) {
  EvalReport rep;
  rep.thresholds = default_thresholds();
  rep.success = success_curve(r, rep.thresholds, mode);
  rep.auc = mean(rep.success);
  bool any_visible = false;
  for (const auto& t : r.truth) any_visible |= t.present;
  rep.tpr = any_visible ? tpr(r) : std::numeric_limits<double>::quiet_NaN();
  rep.prf = pr_f(r);
  for (ChallengeTag t : r.tags) rep.per_challenge[t] = rep.auc;
  if (!r.repetition_boundaries.empty()) rep.per_repetition = per_repetition_curve(r, mode);
  return rep;
}

nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["auc"] = rep.auc;
  j["tpr"] = std::isnan(rep.tpr) ? nlohmann::json(nullptr) : nlohmann::json(rep.tpr);
  j["precision_surrogate"] = rep.prf.precision;
  j["recall_surrogate"] = rep.prf.recall;
  j["f_surrogate"] = rep.prf.f;
  j["thresholds"] = rep.thresholds;
  j["success"] = rep.success;
  nlohmann::json pc = nlohmann::json::object();
  for (const auto& [tag, v] : rep.per_challenge) pc[to_string(tag)] = v;
  j["per_challenge"] = pc;
  j["per_repetition"] = rep.per_repetition;
  return j;
}

void write_report_json(const EvalReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << report_to_json(rep).dump(2) << '\n';
}

void write_curve_csv(const EvalReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "tau,success\n";
  char buf[64];
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f,%.17g\n", rep.thresholds[i], rep.success[i]);
    out << buf;
  }
}

void write_predictions_csv(const TrackResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,x,y,w,h,present,score,search_kind\n";
  char buf[256];
  for (std::size_t i = 0; i < r.predictions.size(); ++i) {
    const Box& b = r.predictions[i];
    const double score = i < r.scores.size() ? r.scores[i] : 0.0;
    const char* kind = i < r.search_kinds.size() ? to_string(r.search_kinds[i]) : "local";
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%s\n", i, b.x, b.y, b.w, b.h,
                  b.present ? 1 : 0, score, kind);
    out << buf;
  }
}

void read_predictions_csv(const std::filesystem::path& path, TrackResult& r) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "frame,x,y,w,h,present,score,search_kind")
    throw DataError(path.string() + ": bad header");
  r.predictions.clear();
  r.scores.clear();
  r.search_kinds.clear();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    auto fail = [&](const std::string& why) { return DataError(path.string() + ":" + std::to_string(lineno) + ": " + why); };
    if (cols.size() != 8) throw fail("expected 8 columns");
    try {
      if (std::stoul(cols[0]) != r.predictions.size()) throw fail("frames out of order");
      Box b{std::stod(cols[1]), std::stod(cols[2]), std::stod(cols[3]), std::stod(cols[4]), cols[5] == "1"};
      if (cols[5] != "0" && cols[5] != "1") throw fail("present must be 0 or 1");
      r.predictions.push_back(b);
      r.scores.push_back(std::strtod(cols[6].c_str(), nullptr));
      if (cols[7] == "local") r.search_kinds.push_back(SearchKind::Local);
      else if (cols[7] == "global") r.search_kinds.push_back(SearchKind::Global);
      else throw fail("unknown search_kind '" + cols[7] + "'");
    } catch (const std::logic_error&) {
      throw fail("malformed number");
    }
  }
}

}  // namespace decaylab
