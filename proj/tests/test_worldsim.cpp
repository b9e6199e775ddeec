#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace wcs {
namespace {

using sim::Injection;
using sim::InjectionKind;

sim::SceneScript one_static_object() {
  sim::SceneScript s;
  s.video_id = "static";
  s.frames = 8;
  s.objects.push_back({"block", 10, 6, 180, 20, 30, 0, 0, {}, false});
  return s;
}

std::string bundle_bytes(const Bundle& b, const std::string& name) {
  const auto dir = testing::scratch_dir(name) / "b";
  write_bundle(b, dir);
  std::string all;
  for (const char* f : {"tracks.txt", "frames.wcsf", "flow.wcsw", "scene.txt", "events.txt"})
    all += detail::read_file(dir / f);
  if (fs::exists(dir / "injections.txt")) all += detail::read_file(dir / "injections.txt");
  return all;
}

TEST(Simulate, StaticObjectGivesIdenticalFramesAndZeroFlow) {
  const Bundle b = sim::simulate(one_static_object());
  for (std::size_t t = 1; t < b.frames->frames; ++t)
    EXPECT_TRUE(std::equal(b.frames->frame(t).begin(), b.frames->frame(t).end(), b.frames->frame(0).begin()));
  for (float v : b.flow->data) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(compute_fp(*b.frames, *b.flow, &b.tracks).fp, 0.0);
  EXPECT_EQ(*b.tracks.tracks[0].boxes[5], (Box{20, 30, 30, 36}));
}

TEST(Simulate, CollisionLoggedAtGeometricContactFrame) {
  for (double v : {1.0, 2.0, 3.0}) {
    for (double gap : {7.0, 12.0, 20.0}) {
      sim::SceneScript s;
      s.frames = 24;
      s.width = 160;  // room for the struck ball to roll on
      s.objects.push_back({"box", 8, 8, 200, 2, 10, v, 0, {}, false});
      s.objects.push_back({"ball", 8, 8, 60, 10 + gap, 10, 0, 0, {}, false});
      // Right edge 10 + v t first passes the ball's left edge 10 + gap.
      const auto expected = std::size_t(std::floor(gap / v)) + 1;
      const sim::World w = sim::simulate_world(s);
      const auto hit = std::find_if(w.events.begin(), w.events.end(),
                                    [](const auto& e) { return e.kind == sim::TruthKind::collision; });
      ASSERT_NE(hit, w.events.end()) << "v=" << v << " gap=" << gap;
      EXPECT_EQ(hit->frame, expected) << "v=" << v << " gap=" << gap;
    }
  }
}

TEST(Simulate, SameSeedIsByteIdentical) {
  sim::SceneScript s = sim::random_scene(42);
  s.noise = 3;
  EXPECT_EQ(bundle_bytes(sim::simulate(s), "seed_a"), bundle_bytes(sim::simulate(s), "seed_b"));
  sim::SceneScript other = s;
  other.seed = s.seed + 1;
  EXPECT_NE(bundle_bytes(sim::simulate(s), "seed_c"), bundle_bytes(sim::simulate(other), "seed_d"));
}

TEST(Simulate, EscapingWithoutExitIsAScriptError) {
  sim::SceneScript s;
  s.objects.push_back({"car", 8, 8, 200, 40, 10, 3, 0, {}, false});
  EXPECT_THROW(sim::simulate(s), ScriptError);
  s.objects[0].may_exit = true;
  const Bundle b = sim::simulate(s);
  EXPECT_EQ(compute_op(b.tracks).per_object[0].exemption, Exemption::boundary_exit);
}

TEST(Simulate, ScriptRoundTrip) {
  sim::SceneScript s = sim::standard_scene();
  s.objects[0].pushes.push_back({5, 0.5, -1.0});
  s.noise = 2;
  const std::string text = sim::serialize_scene(s);
  EXPECT_EQ(sim::parse_scene(text), s);
}

TEST(Simulate, ObjectOutsideWorldAtStartIsRejected) {
  sim::SceneScript s;
  s.objects.push_back({"box", 8, 8, 200, 60, 10, 0, 0, {}, false});
  EXPECT_THROW(sim::validate(s), ScriptError);
}

TEST(Simulate, FlowWarpsCleanFramesExactlyAwayFromDisocclusions) {
  for (std::uint64_t seed : {0ull, 1ull, 2ull, 3ull}) {
    const Bundle b = seed == 0 ? sim::simulate(sim::standard_scene()) : sim::simulate(sim::random_scene(seed));
    const std::size_t H = b.frames->height, W = b.frames->width;
    for (std::size_t t = 0; t + 1 < b.frames->frames; ++t) {
      const auto warp = warp_frame(b.frames->frame(t), b.flow->map(t), H, W);
      const auto next = b.frames->frame(t + 1);
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
          const std::size_t i = y * W + x;
          if (!warp.valid[i]) continue;
          bool revealed = false;  // covered by a moving box at t, not by that box at t+1
          for (const auto& tr : b.tracks.tracks) {
            const auto& a = tr.boxes[t];
            const auto& c = tr.boxes[t + 1];
            auto inside = [&](const std::optional<Box>& bx) {
              return bx && double(x) >= bx->x_min && double(x) < bx->x_max && double(y) >= bx->y_min &&
                     double(y) < bx->y_max;
            };
            if (inside(a) && !inside(c)) revealed = true;
          }
          if (revealed) continue;
          ASSERT_LE(std::abs(double(next[i]) - warp.predicted[i]), 1.0)
              << "seed " << seed << " t " << t << " at " << x << "," << y;
        }
      }
    }
  }
}

TEST(Inject, VanishMidwayLowersOp) {
  sim::SceneScript s = sim::standard_scene();
  s.frames = 10;
  const Bundle clean = sim::simulate(s);
  Injection inj;
  inj.kind = InjectionKind::vanish_midway;
  inj.object = 1;
  inj.start = 4;
  inj.end = 9;
  const Bundle bad = sim::inject(clean, inj);
  EXPECT_LT(compute_op(bad.tracks).op, compute_op(clean.tracks).op);
  for (std::size_t t = 4; t < 10; ++t) EXPECT_FALSE(bad.tracks.tracks[1].visible(t));
}

TEST(Inject, ConstantColorFilterLeavesFpUnchanged) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  Injection inj;
  inj.kind = InjectionKind::constant_color_filter;
  inj.amplitude = 10;
  const Bundle shifted = sim::inject(clean, inj);
  EXPECT_NE(shifted.frames->data, clean.frames->data);
  EXPECT_NEAR(compute_fp(*shifted.frames, *shifted.flow, &shifted.tracks).fp,
              compute_fp(*clean.frames, *clean.flow, &clean.tracks).fp, 1e-9);
}

TEST(Inject, SpontaneousMotionBreaksCausality) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  Injection inj;
  inj.kind = InjectionKind::spontaneous_motion;
  inj.object = 3;
  inj.frame = 10;
  inj.dx = 1;
  EXPECT_LT(compute_cc(sim::inject(clean, inj).tracks).cc, 1.0);
}

TEST(Inject, SpontaneousMotionNeedsARestingObject) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  Injection inj;
  inj.kind = InjectionKind::spontaneous_motion;
  inj.object = 0;  // already moving
  inj.frame = 3;
  inj.dx = 1;
  EXPECT_THROW(sim::inject(clean, inj), ScriptError);
}

TEST(Inject, EveryInjectorChangesBytesAndAllButColorFilterChangeASubmetric) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  const Config cfg;
  const VideoScore base = score_bundle(clean, cfg, WeightVector::equal());
  const std::string clean_bytes = bundle_bytes(clean, "inj_clean");
  for (const auto& named : sim::standard_injections()) {
    const Bundle bad = sim::inject(clean, named.injection);
    EXPECT_NE(bundle_bytes(bad, "inj_" + named.name), clean_bytes) << named.name;
    const VideoScore v = score_bundle(bad, cfg, WeightVector::equal());
    const bool changed = v.sub.op != base.sub.op || v.sub.rs != base.sub.rs || v.sub.cc != base.sub.cc ||
                         v.sub.fp != base.sub.fp;
    EXPECT_EQ(changed, named.injection.kind != InjectionKind::constant_color_filter) << named.name;
  }
}

TEST(Inject, OverlappingInjectionsAreRejected) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  Injection a;
  a.kind = InjectionKind::teleport;
  a.object = 2;
  a.frame = 12;
  a.dx = -30;
  Injection b = a;
  b.object = 3;
  b.dx = 20;
  const Bundle once = sim::inject(clean, a);
  EXPECT_THROW(sim::inject(once, b), ScriptError);
  EXPECT_THROW(sim::inject(clean, std::vector<Injection>{a, b}), ScriptError);
}

TEST(Inject, LogIsReplayed) {
  const Bundle clean = sim::simulate(sim::standard_scene());
  Injection a;
  a.kind = InjectionKind::brightness_flicker;
  a.amplitude = 5;
  Injection b;
  b.kind = InjectionKind::teleport;
  b.object = 2;
  b.frame = 3;
  b.dx = -20;
  EXPECT_THROW(sim::inject(sim::inject(clean, a), b), ScriptError);  // flicker touches every odd frame
  Injection c;
  c.kind = InjectionKind::vanish_midway;
  c.object = 3;
  c.start = 4;
  c.end = 6;
  const Bundle twice = sim::inject(sim::inject(clean, b), c);
  EXPECT_EQ(sim::parse_injection_log(twice.extras.at("injections.txt")).size(), 2u);
  EXPECT_EQ(bundle_bytes(twice, "replay_a"), bundle_bytes(sim::inject(clean, std::vector<Injection>{b, c}), "replay_b"));
}

TEST(Inject, NeedsASceneScript) {
  Bundle b = sim::simulate(sim::standard_scene());
  b.extras.clear();
  Injection a;
  a.kind = InjectionKind::brightness_flicker;
  a.amplitude = 5;
  EXPECT_THROW(sim::inject(b, a), ScriptError);
}

TEST(Inject, InjectionLineRoundTrip) {
  Injection a;
  a.kind = InjectionKind::teleport;
  a.object = 2;
  a.frame = 7;
  a.dx = -36.5;
  a.dy = 0.25;
  EXPECT_EQ(sim::parse_injection(sim::serialize_injection(a)), a);
  EXPECT_THROW(sim::parse_injection("warp object=1"), ParseError);
}

TEST(RandomScene, CollisionFrameInDocumentedRange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const sim::World w = sim::simulate_world(sim::random_scene(seed));
    const auto hit = std::find_if(w.events.begin(), w.events.end(),
                                  [](const auto& e) { return e.kind == sim::TruthKind::collision; });
    ASSERT_NE(hit, w.events.end()) << seed;
    EXPECT_GE(hit->frame, 12u);
    EXPECT_LE(hit->frame, 16u);
  }
}

}  // namespace
}  // namespace wcs
