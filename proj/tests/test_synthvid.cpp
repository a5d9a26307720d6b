#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "decaylab/error.hpp"
#include "decaylab/synthvid.hpp"

using namespace decaylab;
namespace fs = std::filesystem;

namespace {

SequenceConfig small_config(std::uint64_t seed = 3) {
  SequenceConfig c;
  c.width = 96;
  c.height = 72;
  c.length = 30;
  c.seed = seed;
  c.target_size = 16;
  c.motion.velocity = 1.2;
  c.motion.jitter_sd = 0.2;
  return c;
}

ChallengeEvent event(ChallengeTag kind, int start, int end) {
  ChallengeEvent e;
  e.kind = kind;
  e.start = start;
  e.end = end;
  return e;
}

Sequence letters(int n) {
  Sequence s;
  for (int i = 0; i < n; ++i) {
    s.frames.push_back(Frame(2, 2, static_cast<float>(i) / 10.0f));
    s.truth.push_back(Box::make(i, 0, 1, 1));
  }
  s.tags = {ChallengeTag::OCC};
  s.seed = 9;
  return s;
}

fs::path tmpdir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("decaylab_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("static scene: every frame identical, truth constant") {
  SequenceConfig c = small_config();
  c.motion = {0.0, 0.0};
  const Sequence s = generate_sequence(c);
  REQUIRE(s.size() == 30);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s.frames[i] == s.frames[0]);
    CHECK(s.truth[i] == s.truth[0]);
  }
  CHECK(s.tags.empty());
}

TEST_CASE("out-of-view interval marks exactly those frames absent") {
  SequenceConfig c = small_config();
  c.events = {event(ChallengeTag::OV, 10, 20)};
  const Sequence s = generate_sequence(c);
  for (int frame = 1; frame <= c.length; ++frame) {
    const bool inside = frame >= 10 && frame <= 20;
    CHECK(s.truth[frame - 1].present == !inside);
  }
  CHECK(s.tags == std::vector<ChallengeTag>{ChallengeTag::OV});
}

TEST_CASE("generation is deterministic in config and seed") {
  SequenceConfig c = small_config(17);
  c.events = {event(ChallengeTag::OCC, 5, 9), event(ChallengeTag::BC, 1, 30), event(ChallengeTag::FM, 12, 13)};
  CHECK(generate_sequence(c) == generate_sequence(c));
  SequenceConfig d = c;
  d.seed = 18;
  CHECK_FALSE(generate_sequence(d) == generate_sequence(c));
}

TEST_CASE("every challenge measurably alters the frames and is tagged") {
  const SequenceConfig base = small_config(21);
  const Sequence plain = generate_sequence(base);
  for (auto kind : {ChallengeTag::IV, ChallengeTag::SV, ChallengeTag::OCC, ChallengeTag::DEF, ChallengeTag::MB,
                    ChallengeTag::FM, ChallengeTag::IPR_proxy, ChallengeTag::OV, ChallengeTag::BC, ChallengeTag::LR}) {
    CAPTURE(to_string(kind));
    SequenceConfig c = base;
    c.events = {event(kind, 8, 14)};
    const Sequence s = generate_sequence(c);
    CHECK(s.tags == std::vector<ChallengeTag>{kind});
    bool differs = false;
    for (int i = 7; i < 14; ++i) differs |= !(s.frames[i] == plain.frames[i]);
    CHECK(differs);
    for (int i = 0; i < 7; ++i) CHECK(s.frames[i] == plain.frames[i]);
  }
}

TEST_CASE("occluder covers at least half of the target") {
  SequenceConfig c = small_config(4);
  c.events = {event(ChallengeTag::OCC, 10, 15)};
  const Sequence occ = generate_sequence(c);
  SequenceConfig p = c;
  p.events.clear();
  const Sequence plain = generate_sequence(p);
  for (int i = 9; i < 15; ++i) {
    const Box b = occ.truth[i];
    int changed = 0, total = 0;
    for (int r = static_cast<int>(std::ceil(b.y)); r < static_cast<int>(b.y + b.h); ++r)
      for (int col = static_cast<int>(std::ceil(b.x)); col < static_cast<int>(b.x + b.w); ++col) {
        ++total;
        changed += occ.frames[i].at(r, col) != plain.frames[i].at(r, col);
      }
    CHECK(changed * 2 >= total);
  }
}

TEST_CASE("fast-motion burst moves farther than the local search radius") {
  SequenceConfig c = small_config(8);
  c.width = 240;
  c.height = 180;
  c.events = {event(ChallengeTag::FM, 10, 10)};
  const Sequence s = generate_sequence(c);
  const double dx = s.truth[9].cx() - s.truth[8].cx(), dy = s.truth[9].cy() - s.truth[8].cy();
  CHECK(std::hypot(dx, dy) > 1.5 * c.target_size);
}

TEST_CASE("every present truth box has positive clipped area") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SequenceConfig c = small_config(seed);
    c.events = {event(ChallengeTag::SV, 3, 12), event(ChallengeTag::OV, 14, 18), event(ChallengeTag::FM, 20, 21)};
    const Sequence s = generate_sequence(c);
    for (const Box& b : s.truth)
      if (b.present) CHECK(clip_box(b, c.width, c.height).area() > 0.0);
  }
}

TEST_CASE("config validation") {
  SequenceConfig c = small_config();
  c.events = {event(ChallengeTag::OCC, 0, 3)};
  CHECK_THROWS_AS(generate_sequence(c), ConfigError);
  c.events = {event(ChallengeTag::OCC, 25, 31)};
  CHECK_THROWS_AS(generate_sequence(c), ConfigError);
  c.events.clear();
  c.target_size = 100;
  CHECK_THROWS_AS(generate_sequence(c), ConfigError);
}

TEST_CASE("extend_long expansion") {
  const Sequence s = letters(3);
  const Sequence r1 = extend_long(s, 1);
  std::vector<int> order;
  for (const auto& b : r1.truth) order.push_back(static_cast<int>(b.x));
  CHECK(order == std::vector<int>{0, 1, 2, 1, 0});

  const Sequence r2 = extend_long(s, 2);
  order.clear();
  for (const auto& b : r2.truth) order.push_back(static_cast<int>(b.x));
  CHECK(order == std::vector<int>{0, 1, 2, 1, 0, 1, 2, 1, 0});
  CHECK(r2.size() == 9);
  CHECK(r2.repetition_boundaries == std::vector<int>{0, 4});
  CHECK(r2.tags == s.tags);
  for (std::size_t i = 0; i < r2.size(); ++i) CHECK(r2.frames[i] == s.frames[static_cast<std::size_t>(order[i])]);

  CHECK_THROWS(extend_long(letters(1), 2));
  CHECK_THROWS(extend_long(s, 0));
}

TEST_CASE("extend_long length formula and prefix preservation") {
  for (int T = 2; T <= 9; ++T)
    for (int R = 1; R <= 6; ++R) {
      const Sequence s = letters(T);
      const Sequence e = extend_long(s, R);
      CHECK(e.size() == static_cast<std::size_t>((2 * T - 2) * R + 1));
      for (int i = 0; i < T; ++i) {
        CHECK(e.frames[i] == s.frames[i]);
        CHECK(e.truth[i] == s.truth[i]);
      }
      for (int k = 0; k < R; ++k) CHECK(e.repetition_boundaries[k] == k * (2 * T - 2));
    }
}

TEST_CASE("sequence directory round trip") {
  SequenceConfig c = small_config(6);
  c.events = {event(ChallengeTag::OV, 4, 7), event(ChallengeTag::IV, 10, 20)};
  const Sequence s = extend_long(generate_sequence(c), 2);
  const auto dir = tmpdir("roundtrip");
  write_sequence(s, dir);
  CHECK(fs::exists(dir / "frames" / "000000.pgm"));
  CHECK(read_sequence(dir) == s);
  fs::remove_all(dir);
}

TEST_CASE("malformed sequence directories are rejected") {
  SequenceConfig c = small_config(6);
  c.length = 5;
  const Sequence s = generate_sequence(c);
  const auto dir = tmpdir("malformed");
  write_sequence(s, dir);

  {
    std::ifstream in(dir / "annotations.csv");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto pos = text.find("\n2,");
    REQUIRE(pos != std::string::npos);
    const auto eol = text.find('\n', pos + 1);
    text.replace(pos + 1, eol - pos - 1, "2,10,10,0,16,1");
    std::ofstream(dir / "annotations.csv") << text;
  }
  try {
    read_sequence(dir);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }

  write_sequence(s, dir);
  fs::remove(dir / "frames" / "000004.pgm");
  CHECK_THROWS_AS(read_sequence(dir), DataError);
  fs::remove_all(dir);
}

TEST_CASE("config JSON round trip") {
  SequenceConfig c = small_config(12);
  c.events = {event(ChallengeTag::OCC, 2, 5), event(ChallengeTag::IPR_proxy, 6, 9)};
  c.events[0].occluder = Box::make(1, 2, 3, 4);
  const nlohmann::json j = c;
  const auto back = j.get<SequenceConfig>();
  CHECK(generate_sequence(back) == generate_sequence(c));
  CHECK(tag_from_string("IPR") == ChallengeTag::IPR_proxy);
  CHECK_THROWS(tag_from_string("XYZ"));
}
