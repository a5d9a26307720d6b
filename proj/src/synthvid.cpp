#include "decaylab/synthvid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "decaylab/error.hpp"
#include "decaylab/pgm.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

namespace {

constexpr std::array<std::pair<ChallengeTag, const char*>, 10> kTagNames{{
    {ChallengeTag::IV, "IV"},
    {ChallengeTag::SV, "SV"},
    {ChallengeTag::OCC, "OCC"},
    {ChallengeTag::DEF, "DEF"},
    {ChallengeTag::MB, "MB"},
    {ChallengeTag::FM, "FM"},
    {ChallengeTag::IPR_proxy, "IPR_proxy"},
    {ChallengeTag::OV, "OV"},
    {ChallengeTag::BC, "BC"},
    {ChallengeTag::LR, "LR"},
}};

// Smooth random field: an n x n lattice of values, bilinear in between.
struct ValueTexture {
  int n = 0;
  std::vector<double> lattice;

  ValueTexture(int size, double lo, double hi, SplitMix64& rng) : n(size), lattice(static_cast<std::size_t>(size) * size) {
    for (double& v : lattice) v = rng.uniform(lo, hi);
  }

  // u, v in [0, 1], clamped.
  double sample(double u, double v) const {
    const double gx = std::clamp(u, 0.0, 1.0) * (n - 1);
    const double gy = std::clamp(v, 0.0, 1.0) * (n - 1);
    const int x0 = std::min(static_cast<int>(gx), n - 2);
    const int y0 = std::min(static_cast<int>(gy), n - 2);
    const double ax = gx - x0, ay = gy - y0;
    auto at = [this](int y, int x) { return lattice[static_cast<std::size_t>(y) * n + x]; };
    return (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) + ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
  }
};

constexpr int kTargetLattice = 7;

Grid make_background(int w, int h, SplitMix64& rng) {
  const int coarse_n = std::max(w, h) / 20 + 2;
  const int fine_n = std::max(w, h) / 7 + 2;
  ValueTexture coarse(coarse_n, 0.25, 0.60, rng);
  ValueTexture fine(fine_n, -0.05, 0.05, rng);
  const double span = std::max(w, h);
  Grid bg(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double u = (c + 0.5) / span, v = (r + 0.5) / span;
      bg.at(r, c) = coarse.sample(u, v) + fine.sample(u, v);
    }
  return bg;
}

double overlap_1d(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

struct Warp {
  double def_amplitude = 0.0;
  double def_phase = 0.0;
  double rotation = 0.0;
};

// Composite a textured box with fractional pixel coverage over `canvas`.
void draw_textured_box(Grid& canvas, const Box& b, const ValueTexture& tex, const Warp& warp) {
  const int c0 = std::max(0, static_cast<int>(std::floor(b.x)));
  const int c1 = std::min(canvas.cols - 1, static_cast<int>(std::ceil(b.x + b.w)));
  const int r0 = std::max(0, static_cast<int>(std::floor(b.y)));
  const int r1 = std::min(canvas.rows - 1, static_cast<int>(std::ceil(b.y + b.h)));
  const double cs = std::cos(warp.rotation), sn = std::sin(warp.rotation);
  for (int r = r0; r <= r1; ++r) {
    const double cov_y = overlap_1d(r, r + 1, b.y, b.y + b.h);
    if (cov_y <= 0.0) continue;
    for (int c = c0; c <= c1; ++c) {
      const double cov = cov_y * overlap_1d(c, c + 1, b.x, b.x + b.w);
      if (cov <= 0.0) continue;
      double u = (c + 0.5 - b.x) / b.w;
      double v = (r + 0.5 - b.y) / b.h;
      if (warp.rotation != 0.0) {
        const double du = u - 0.5, dv = v - 0.5;
        u = 0.5 + cs * du - sn * dv;
        v = 0.5 + sn * du + cs * dv;
      }
      if (warp.def_amplitude != 0.0) u += warp.def_amplitude * std::sin(4.0 * std::numbers::pi * v + warp.def_phase);
      const double t = tex.sample(u, v);
      canvas.at(r, c) = (1.0 - cov) * canvas.at(r, c) + cov * t;
    }
  }
}

Grid box_blur(const Grid& g, int radius) {
  if (radius <= 0) return g;
  auto clampi = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
  Grid tmp(g.rows, g.cols), out(g.rows, g.cols);
  const double norm = 1.0 / (2 * radius + 1);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += g.at(r, clampi(c + d, 0, g.cols - 1));
      tmp.at(r, c) = s * norm;
    }
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += tmp.at(clampi(r + d, 0, g.rows - 1), c);
      out.at(r, c) = s * norm;
    }
  return out;
}

Grid low_resolution(const Grid& g, int factor) {
  if (factor <= 1) return g;
  const int sr = (g.rows + factor - 1) / factor, sc = (g.cols + factor - 1) / factor;
  Grid small(sr, sc);
  for (int r = 0; r < sr; ++r)
    for (int c = 0; c < sc; ++c) {
      double s = 0.0;
      int n = 0;
      for (int a = r * factor; a < std::min(g.rows, (r + 1) * factor); ++a)
        for (int b = c * factor; b < std::min(g.cols, (c + 1) * factor); ++b, ++n) s += g.at(a, b);
      small.at(r, c) = s / n;
    }
  // Upsample over the exact covered extent, then crop.
  Grid up = resample_grid(small, sr * factor, sc * factor);
  Grid out(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) out.at(r, c) = up.at(r, c);
  return out;
}

bool active(const ChallengeEvent& e, int t) { return t >= e.start && t <= e.end; }

double ramp(const ChallengeEvent& e, int t) {
  if (t <= e.start) return 0.0;
  if (t >= e.end) return 1.0;
  return static_cast<double>(t - e.start) / (e.end - e.start);
}

void validate(const SequenceConfig& cfg) {
  if (cfg.width <= 0 || cfg.height <= 0) throw ConfigError("sequence: frame size must be positive");
  if (cfg.length < 1) throw ConfigError("sequence: length must be >= 1");
  if (!(cfg.target_size > 1.0)) throw ConfigError("sequence: target_size must exceed 1 px");
  double max_scale = 1.0;
  for (const auto& e : cfg.events) {
    if (e.start < 1 || e.end > cfg.length || e.start > e.end)
      throw ConfigError("sequence: event " + to_string(e.kind) + " interval [" + std::to_string(e.start) + "," +
                        std::to_string(e.end) + "] outside [1," + std::to_string(cfg.length) + "]");
    if (e.kind == ChallengeTag::SV) {
      if (!(e.scale_factor > 0.0)) throw ConfigError("sequence: SV scale_factor must be positive");
      max_scale = std::max(max_scale, e.scale_factor);
    }
  }
  if (cfg.target_size * max_scale + 2.0 > std::min(cfg.width, cfg.height))
    throw ConfigError("sequence: target larger than frame");
}

}  // namespace

std::string to_string(ChallengeTag tag) {
  for (const auto& [t, name] : kTagNames)
    if (t == tag) return name;
  return "?";
}

ChallengeTag tag_from_string(const std::string& s) {
  for (const auto& [t, name] : kTagNames)
    if (s == name) return t;
  if (s == "IPR") return ChallengeTag::IPR_proxy;
  throw ConfigError("unknown challenge tag: " + s);
}

Sequence generate_sequence(const SequenceConfig& cfg) {
  validate(cfg);
  const int W = cfg.width, H = cfg.height, T = cfg.length;

  SplitMix64 bg_rng(derive_seed(cfg.seed, "background"));
  SplitMix64 tex_rng(derive_seed(cfg.seed, "target-texture"));
  SplitMix64 motion_rng(derive_seed(cfg.seed, "motion"));
  SplitMix64 event_rng(derive_seed(cfg.seed, "events"));

  const Grid background = make_background(W, H, bg_rng);
  const ValueTexture target_tex(kTargetLattice, 0.0, 1.0, tex_rng);

  // Target size per frame (SV events compound).
  std::vector<double> size(T + 1, cfg.target_size);
  for (int t = 1; t <= T; ++t)
    for (const auto& e : cfg.events)
      if (e.kind == ChallengeTag::SV) size[t] *= std::pow(e.scale_factor, ramp(e, t));

  // Per-event random draws happen up front so adding rendering effects never
  // shifts the motion stream.
  std::vector<double> burst_angle(cfg.events.size(), 0.0);
  for (std::size_t k = 0; k < cfg.events.size(); ++k) burst_angle[k] = event_rng.uniform(0.0, 2.0 * std::numbers::pi);

  // Trajectory.
  std::vector<Box> truth(T + 1);
  auto in_ov = [&](int t) {
    return std::any_of(cfg.events.begin(), cfg.events.end(),
                       [t](const ChallengeEvent& e) { return e.kind == ChallengeTag::OV && active(e, t); });
  };
  auto reentry = [&](int t) {
    return std::any_of(cfg.events.begin(), cfg.events.end(),
                       [t](const ChallengeEvent& e) { return e.kind == ChallengeTag::OV && t == e.end + 1; });
  };
  double cx = motion_rng.uniform(size[1] / 2 + 2, W - size[1] / 2 - 2);
  double cy = motion_rng.uniform(size[1] / 2 + 2, H - size[1] / 2 - 2);
  const double heading = motion_rng.uniform(0.0, 2.0 * std::numbers::pi);
  double vx = cfg.motion.velocity * std::cos(heading);
  double vy = cfg.motion.velocity * std::sin(heading);
  double last_cx = cx, last_cy = cy;
  for (int t = 1; t <= T; ++t) {
    const double half = size[t] / 2;
    if (t > 1 && !in_ov(t)) {
      if (reentry(t)) {
        // Uncorrelated re-entry: uniform over the frame, away from the exit point.
        const double min_dist = 3.0 * cfg.target_size;
        for (int attempt = 0; attempt < 64; ++attempt) {
          cx = motion_rng.uniform(half + 1, W - half - 1);
          cy = motion_rng.uniform(half + 1, H - half - 1);
          if (std::hypot(cx - last_cx, cy - last_cy) >= min_dist) break;
        }
      } else {
        double dx = vx + cfg.motion.jitter_sd * motion_rng.normal();
        double dy = vy + cfg.motion.jitter_sd * motion_rng.normal();
        for (std::size_t k = 0; k < cfg.events.size(); ++k) {
          const auto& e = cfg.events[k];
          if (e.kind == ChallengeTag::FM && active(e, t)) {
            dx += e.burst_speed * std::cos(burst_angle[k]);
            dy += e.burst_speed * std::sin(burst_angle[k]);
          }
        }
        cx += dx;
        cy += dy;
      }
      // Reflect off the walls, keeping the box inside the frame.
      const double lo_x = half + 1, hi_x = W - half - 1, lo_y = half + 1, hi_y = H - half - 1;
      for (int pass = 0; pass < 4; ++pass) {
        if (cx < lo_x) { cx = 2 * lo_x - cx; vx = std::abs(vx); }
        if (cx > hi_x) { cx = 2 * hi_x - cx; vx = -std::abs(vx); }
        if (cy < lo_y) { cy = 2 * lo_y - cy; vy = std::abs(vy); }
        if (cy > hi_y) { cy = 2 * hi_y - cy; vy = -std::abs(vy); }
      }
      cx = std::clamp(cx, lo_x, hi_x);
      cy = std::clamp(cy, lo_y, hi_y);
    }
    if (in_ov(t)) {
      truth[t] = Box::absent();
    } else {
      truth[t] = Box::from_center(cx, cy, size[t], size[t]);
      last_cx = cx;
      last_cy = cy;
    }
  }

  // Static scene elements.
  std::vector<Box> occluders(cfg.events.size());
  std::vector<ValueTexture> occluder_tex;
  std::vector<std::vector<std::pair<Box, ValueTexture>>> distractors(cfg.events.size());
  for (std::size_t k = 0; k < cfg.events.size(); ++k) {
    const auto& e = cfg.events[k];
    if (e.kind == ChallengeTag::OCC) {
      if (e.occluder) {
        occluders[k] = *e.occluder;
      } else {
        double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
        for (int t = e.start; t <= e.end; ++t) {
          if (!truth[t].present) continue;
          x0 = std::min(x0, truth[t].x);
          y0 = std::min(y0, truth[t].y);
          x1 = std::max(x1, truth[t].x + truth[t].w);
          y1 = std::max(y1, truth[t].y + truth[t].h);
        }
        occluders[k] = x1 > x0 ? Box::make(x0 - 1, y0 - 1, x1 - x0 + 2, y1 - y0 + 2) : Box::absent();
      }
      occluder_tex.emplace_back(4, 0.05, 0.95, event_rng);
    } else if (e.kind == ChallengeTag::BC) {
      for (int d = 0; d < e.distractors; ++d) {
        const double s = cfg.target_size;
        const Box b = Box::make(event_rng.uniform(1, W - s - 1), event_rng.uniform(1, H - s - 1), s, s);
        distractors[k].emplace_back(b, ValueTexture(kTargetLattice, 0.0, 1.0, event_rng));
      }
    }
  }

  Sequence seq;
  seq.seed = cfg.seed;
  seq.frames.reserve(T);
  for (int t = 1; t <= T; ++t) {
    Grid canvas = background;
    for (std::size_t k = 0; k < cfg.events.size(); ++k)
      if (cfg.events[k].kind == ChallengeTag::BC && active(cfg.events[k], t))
        for (const auto& [b, tex] : distractors[k]) draw_textured_box(canvas, b, tex, {});

    Warp warp;
    for (const auto& e : cfg.events) {
      if (e.kind == ChallengeTag::DEF && active(e, t)) {
        warp.def_amplitude += e.amplitude;
        warp.def_phase = 2.0 * std::numbers::pi * (t - e.start) / 12.0;
      }
      if (e.kind == ChallengeTag::IPR_proxy) warp.rotation += e.rotation * ramp(e, t);
    }
    if (truth[t].present) draw_textured_box(canvas, truth[t], target_tex, warp);

    std::size_t occ_index = 0;
    for (std::size_t k = 0; k < cfg.events.size(); ++k) {
      if (cfg.events[k].kind != ChallengeTag::OCC) continue;
      if (active(cfg.events[k], t) && occluders[k].present) draw_textured_box(canvas, occluders[k], occluder_tex[occ_index], {});
      ++occ_index;
    }

    double gain = 1.0;
    int blur = 0, down = 1;
    for (const auto& e : cfg.events) {
      if (!active(e, t)) continue;
      if (e.kind == ChallengeTag::IV) gain *= e.gain_min + (e.gain_max - e.gain_min) * ramp(e, t);
      if (e.kind == ChallengeTag::MB) blur = std::max(blur, e.blur_radius);
      if (e.kind == ChallengeTag::LR) down = std::max(down, e.downsample);
    }
    if (down > 1) canvas = low_resolution(canvas, down);
    if (blur > 0) canvas = box_blur(canvas, blur);
    if (gain != 1.0)
      for (double& v : canvas.values) v *= gain;

    Frame f = to_frame(canvas);
    quantize_8bit(f);
    seq.frames.push_back(std::move(f));
    seq.truth.push_back(truth[t]);
  }

  for (const auto& e : cfg.events) seq.tags.push_back(e.kind);
  std::sort(seq.tags.begin(), seq.tags.end());
  seq.tags.erase(std::unique(seq.tags.begin(), seq.tags.end()), seq.tags.end());
  return seq;
}

Sequence extend_long(const Sequence& s, int repetitions) {
  const int T = static_cast<int>(s.frames.size());
  if (T < 2) throw ConfigError("extend_long: sequence needs at least 2 frames");
  if (repetitions < 1) throw ConfigError("extend_long: repetitions must be >= 1");
  Sequence out;
  out.seed = s.seed;
  out.tags = s.tags;
  const std::size_t total = static_cast<std::size_t>(2 * T - 2) * repetitions + 1;
  out.frames.reserve(total);
  out.truth.reserve(total);
  auto push = [&](int i) {
    out.frames.push_back(s.frames[i]);
    out.truth.push_back(s.truth[i]);
  };
  push(0);
  for (int r = 0; r < repetitions; ++r) {
    out.repetition_boundaries.push_back(r * (2 * T - 2));
    for (int i = 1; i < T; ++i) push(i);
    for (int i = T - 2; i >= 0; --i) push(i);
  }
  return out;
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.pgm", i);
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_sequence(const Sequence& s, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw DataError("cannot create sequence directory " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < s.frames.size(); ++i) write_pgm(s.frames[i], dir / "frames" / frame_name(i));

  std::ofstream ann(dir / "annotations.csv");
  if (!ann) throw DataError("cannot write " + (dir / "annotations.csv").string());
  ann << "frame,x,y,w,h,present\n";
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    const Box& b = s.truth[i];
    ann << i << ',' << fmt_double(b.present ? b.x : 0.0) << ',' << fmt_double(b.present ? b.y : 0.0) << ','
        << fmt_double(b.present ? b.w : 0.0) << ',' << fmt_double(b.present ? b.h : 0.0) << ',' << (b.present ? 1 : 0)
        << '\n';
  }

  nlohmann::json meta;
  meta["tags"] = nlohmann::json::array();
  for (auto t : s.tags) meta["tags"].push_back(to_string(t));
  meta["seed"] = s.seed;
  meta["width"] = s.width();
  meta["height"] = s.height();
  meta["repetition_boundaries"] = s.repetition_boundaries;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

Sequence read_sequence(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Sequence s;

  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw DataError("missing meta.json in " + dir.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
    for (const auto& t : meta.at("tags")) s.tags.push_back(tag_from_string(t.get<std::string>()));
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.repetition_boundaries = meta.value("repetition_boundaries", std::vector<int>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed meta.json in " + dir.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("meta.json: ") + e.what());
  }
  const int width = meta.value("width", 0), height = meta.value("height", 0);

  std::ifstream ann(dir / "annotations.csv");
  if (!ann) throw DataError("missing annotations.csv in " + dir.string());
  std::string line;
  int lineno = 0;
  while (std::getline(ann, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("frame", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    auto bad = [&](const std::string& why) { return DataError("annotations.csv line " + std::to_string(lineno) + ": " + why); };
    if (cells.size() != 6) throw bad("expected 6 fields");
    Box b;
    std::size_t idx = 0;
    try {
      idx = std::stoul(cells[0]);
      b.x = std::stod(cells[1]);
      b.y = std::stod(cells[2]);
      b.w = std::stod(cells[3]);
      b.h = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw bad("unparseable number");
    }
    if (cells[5] != "0" && cells[5] != "1") throw bad("present must be 0 or 1");
    b.present = cells[5] == "1";
    if (idx != s.truth.size()) throw bad("frame index out of order");
    if (b.present && (!(b.w > 0.0) || !(b.h > 0.0))) throw bad("present box must have w > 0 and h > 0");
    if (!b.present) b = Box::absent();
    s.truth.push_back(b);
  }

  std::size_t frame_files = 0;
  if (fs::is_directory(dir / "frames"))
    for (const auto& entry : fs::directory_iterator(dir / "frames"))
      if (entry.path().extension() == ".pgm") ++frame_files;
  if (frame_files != s.truth.size())
    throw DataError("frame count " + std::to_string(frame_files) + " does not match annotation rows " +
                    std::to_string(s.truth.size()) + " in " + dir.string());

  s.frames.reserve(frame_files);
  for (std::size_t i = 0; i < frame_files; ++i) {
    const fs::path p = dir / "frames" / frame_name(i);
    if (!fs::exists(p)) throw DataError("missing frame " + p.string());
    Frame f = read_pgm(p);
    if ((width && f.width != width) || (height && f.height != height) ||
        (!s.frames.empty() && (f.width != s.frames[0].width || f.height != s.frames[0].height)))
      throw DataError("frame dimension mismatch at " + p.string());
    s.frames.push_back(std::move(f));
  }
  return s;
}

void to_json(nlohmann::json& j, const ChallengeEvent& e) {
  j = nlohmann::json{{"kind", to_string(e.kind)}, {"start", e.start}, {"end", e.end}};
  switch (e.kind) {
    case ChallengeTag::OCC:
      if (e.occluder) j["occluder"] = {e.occluder->x, e.occluder->y, e.occluder->w, e.occluder->h};
      break;
    case ChallengeTag::IV: j["gain_min"] = e.gain_min; j["gain_max"] = e.gain_max; break;
    case ChallengeTag::SV: j["scale_factor"] = e.scale_factor; break;
    case ChallengeTag::MB: j["blur_radius"] = e.blur_radius; break;
    case ChallengeTag::BC: j["distractors"] = e.distractors; break;
    case ChallengeTag::FM: j["burst_speed"] = e.burst_speed; break;
    case ChallengeTag::DEF: j["amplitude"] = e.amplitude; break;
    case ChallengeTag::IPR_proxy: j["rotation"] = e.rotation; break;
    case ChallengeTag::LR: j["downsample"] = e.downsample; break;
    case ChallengeTag::OV: break;
  }
}

void from_json(const nlohmann::json& j, ChallengeEvent& e) {
  e = ChallengeEvent{};
  e.kind = tag_from_string(j.at("kind").get<std::string>());
  e.start = j.at("start").get<int>();
  e.end = j.at("end").get<int>();
  if (j.contains("occluder")) {
    const auto v = j.at("occluder").get<std::vector<double>>();
    if (v.size() != 4) throw ConfigError("occluder must be [x, y, w, h]");
    e.occluder = Box::make(v[0], v[1], v[2], v[3]);
  }
  e.gain_min = j.value("gain_min", e.gain_min);
  e.gain_max = j.value("gain_max", e.gain_max);
  e.scale_factor = j.value("scale_factor", e.scale_factor);
  e.blur_radius = j.value("blur_radius", e.blur_radius);
  e.distractors = j.value("distractors", e.distractors);
  e.burst_speed = j.value("burst_speed", e.burst_speed);
  e.amplitude = j.value("amplitude", e.amplitude);
  e.rotation = j.value("rotation", e.rotation);
  e.downsample = j.value("downsample", e.downsample);
}

void to_json(nlohmann::json& j, const SequenceConfig& c) {
  j = nlohmann::json{{"width", c.width},
                     {"height", c.height},
                     {"length", c.length},
                     {"seed", c.seed},
                     {"target_size", c.target_size},
                     {"motion", {{"velocity", c.motion.velocity}, {"jitter_sd", c.motion.jitter_sd}}},
                     {"events", c.events}};
}

void from_json(const nlohmann::json& j, SequenceConfig& c) {
  c = SequenceConfig{};
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.length = j.value("length", c.length);
  c.seed = j.value("seed", c.seed);
  c.target_size = j.value("target_size", c.target_size);
  if (j.contains("motion")) {
    c.motion.velocity = j.at("motion").value("velocity", c.motion.velocity);
    c.motion.jitter_sd = j.at("motion").value("jitter_sd", c.motion.jitter_sd);
  }
  if (j.contains("events")) c.events = j.at("events").get<std::vector<ChallengeEvent>>();
}

}  // namespace decaylab
