#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decaylab/geom.hpp"

namespace decaylab {

enum class ChallengeTag { IV, SV, OCC, DEF, MB, FM, IPR_proxy, OV, BC, LR };

std::string to_string(ChallengeTag tag);
ChallengeTag tag_from_string(const std::string& s);

/// One timed challenge. Frames are 1-based and the interval is inclusive.
/// Only the parameters relevant to `kind` are read.
struct ChallengeEvent {
  ChallengeTag kind = ChallengeTag::OCC;
  int start = 1;
  int end = 1;

  std::optional<Box> occluder;  // OCC; default: bounding box of the target over the interval
  double gain_min = 0.5;        // IV: gain ramps linearly gain_min -> gain_max over the interval
  double gain_max = 1.0;
  double scale_factor = 1.5;    // SV: size ramps geometrically to this factor, then holds
  int blur_radius = 2;          // MB
  int distractors = 3;          // BC
  double burst_speed = 60.0;    // FM: px per frame, fixed random direction per event
  double amplitude = 0.12;      // DEF: warp amplitude as a fraction of target width
  double rotation = 0.8;        // IPR_proxy: texture rotation (radians) reached at `end`, then held
  int downsample = 3;           // LR
};

struct MotionModel {
  double velocity = 1.0;   // px / frame
  double jitter_sd = 0.0;  // px
};

struct SequenceConfig {
  int width = 240;
  int height = 180;
  int length = 60;
  std::uint64_t seed = 1;
  double target_size = 24.0;
  MotionModel motion;
  std::vector<ChallengeEvent> events;
};

struct Sequence {
  std::vector<Frame> frames;
  std::vector<Box> truth;
  std::vector<ChallengeTag> tags;  // sorted, unique
  std::uint64_t seed = 0;
  std::vector<int> repetition_boundaries;  // start index of each repetition; empty if not extended

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  std::size_t size() const { return frames.size(); }

  bool operator==(const Sequence&) const = default;
};

/// Throws ConfigError on events outside [1, T] or a target that cannot fit.
Sequence generate_sequence(const SequenceConfig& cfg);

/// x1, then R times: x2..xT followed by x_{T-1}..x1. Length (2T - 2) R + 1.
/// Repetition k (0-based) starts at k (2T - 2).
Sequence extend_long(const Sequence& s, int repetitions);

/// frames/%06d.pgm, annotations.csv (frame,x,y,w,h,present), meta.json.
void write_sequence(const Sequence& s, const std::filesystem::path& dir);
Sequence read_sequence(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const ChallengeEvent& e);
void from_json(const nlohmann::json& j, ChallengeEvent& e);
void to_json(nlohmann::json& j, const SequenceConfig& c);
void from_json(const nlohmann::json& j, SequenceConfig& c);

}  // namespace decaylab
