#pragma once

// Deterministic 2D rectangle world. A scene script is integrated frame by
// frame (Euler steps, elastic axis-aligned collisions), rendered to grayscale
// frames with exact tracks and ground-truth flow, and optionally corrupted by
// scripted injections.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wcs/config.hpp"
#include "wcs/error.hpp"
#include "wcs/interchange.hpp"
#include "wcs/types.hpp"

namespace wcs::sim {

inline constexpr const char* kSceneFile = "scene.txt";
inline constexpr const char* kEventsFile = "events.txt";
inline constexpr const char* kInjectionsFile = "injections.txt";

struct Push {
  std::size_t frame = 0;
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const Push&, const Push&) = default;
};

struct ScriptObject {
  std::string label = "object";
  int width = 8;
  int height = 8;
  int gray = 200;
  double x = 0.0;  // top-left corner at frame 0
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  std::vector<Push> pushes;  // velocity set at the given frame
  bool may_exit = false;

  friend bool operator==(const ScriptObject&, const ScriptObject&) = default;
};

struct SceneScript {
  std::string video_id = "scene";
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t frames = 24;
  int background = 100;
  std::uint64_t seed = 0;
  int noise = 0;  // uniform per-pixel noise amplitude in gray levels
  std::vector<ScriptObject> objects;  // depth order: later objects paint over earlier ones

  friend bool operator==(const SceneScript&, const SceneScript&) = default;
};

enum class TruthKind { push, collision, exit };

struct TruthEvent {
  TruthKind kind = TruthKind::push;
  std::size_t frame = 0;
  int object = 0;
  int partner = -1;

  friend bool operator==(const TruthEvent&, const TruthEvent&) = default;
};

/// Physical state before rendering: top-left positions per object per frame.
struct World {
  SceneScript script;
  std::vector<std::vector<Point>> pos;
  std::vector<std::vector<std::uint8_t>> hidden;  // forced invisible (injections)
  std::vector<std::size_t> frame_order;           // rendered frame f shows state frame_order[f]
  std::vector<int> brightness;                    // per rendered frame additive offset
  std::vector<TruthEvent> events;
};

// ---------------------------------------------------------------------------
// Script validation and file format

inline void validate(const SceneScript& s) {
  if (s.frames < 2) throw ScriptError("scene: frames must be >= 2");
  if (s.height < 1 || s.width < 1) throw ScriptError("scene: world size must be positive");
  if (s.background < 0 || s.background > 255) throw ScriptError("scene: background must be in [0,255]");
  if (s.noise < 0 || s.noise > 255) throw ScriptError("scene: noise must be in [0,255]");
  if (s.video_id.empty()) throw ScriptError("scene: empty video_id");
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    const std::string who = "scene: object " + std::to_string(i);
    if (o.width < 1 || o.height < 1) throw ScriptError(who + " needs positive size");
    if (o.gray < 0 || o.gray > 255) throw ScriptError(who + " gray must be in [0,255]");
    if (o.label.empty() || o.label.find_first_of(" \t") != std::string::npos)
      throw ScriptError(who + " label must be a nonempty word");
    for (double v : {o.x, o.y, o.vx, o.vy})
      if (!std::isfinite(v)) throw ScriptError(who + " has non-finite kinematics");
    if (o.x < 0 || o.y < 0 || o.x + o.width > double(s.width) || o.y + o.height > double(s.height))
      throw ScriptError(who + " does not fit within the world at frame 0");
    for (const auto& p : o.pushes)
      if (p.frame >= s.frames) throw ScriptError(who + " push scheduled after the last frame");
  }
}

inline std::string serialize_scene(const SceneScript& s) {
  std::ostringstream os;
  os << "[world]\n";
  os << "video_id = " << s.video_id << "\n";
  os << "height = " << s.height << "\n";
  os << "width = " << s.width << "\n";
  os << "frames = " << s.frames << "\n";
  os << "background = " << s.background << "\n";
  os << "seed = " << s.seed << "\n";
  os << "noise = " << s.noise << "\n";
  for (const auto& o : s.objects) {
    os << "\n[object]\n";
    os << "label = " << o.label << "\n";
    os << "width = " << o.width << "\n";
    os << "height = " << o.height << "\n";
    os << "gray = " << o.gray << "\n";
    os << "x = " << format_shortest(o.x) << "\n";
    os << "y = " << format_shortest(o.y) << "\n";
    os << "vx = " << format_shortest(o.vx) << "\n";
    os << "vy = " << format_shortest(o.vy) << "\n";
    os << "exit = " << (o.may_exit ? "true" : "false") << "\n";
    if (!o.pushes.empty()) {
      os << "push = ";
      for (std::size_t k = 0; k < o.pushes.size(); ++k)
        os << (k ? "; " : "") << o.pushes[k].frame << ":" << format_shortest(o.pushes[k].vx) << ","
           << format_shortest(o.pushes[k].vy);
      os << "\n";
    }
  }
  return os.str();
}

inline SceneScript parse_scene(std::string_view text, const std::string& file = kSceneFile) {
  const IniFile ini = parse_ini(text, file);
  SceneScript s;
  bool saw_world = false;
  for (const auto& sec : ini.sections) {
    auto num = [&](const IniEntry& e) {
      auto v = detail::parse_number<double>(e.value);
      if (!v) throw ParseError(file, e.offset, "expected a number for '" + e.key + "'");
      return *v;
    };
    auto uint = [&](const IniEntry& e) {
      auto v = detail::parse_number<std::uint64_t>(e.value);
      if (!v) throw ParseError(file, e.offset, "expected an unsigned integer for '" + e.key + "'");
      return *v;
    };
    if (sec.name == "world") {
      saw_world = true;
      for (const auto& e : sec.entries) {
        if (e.key == "video_id") s.video_id = e.value;
        else if (e.key == "height") s.height = uint(e);
        else if (e.key == "width") s.width = uint(e);
        else if (e.key == "frames") s.frames = uint(e);
        else if (e.key == "background") s.background = int(uint(e));
        else if (e.key == "seed") s.seed = uint(e);
        else if (e.key == "noise") s.noise = int(uint(e));
        else throw ParseError(file, e.offset, "unknown [world] key '" + e.key + "'");
      }
    } else if (sec.name == "object") {
      ScriptObject o;
      for (const auto& e : sec.entries) {
        if (e.key == "label") o.label = e.value;
        else if (e.key == "width") o.width = int(uint(e));
        else if (e.key == "height") o.height = int(uint(e));
        else if (e.key == "gray") o.gray = int(uint(e));
        else if (e.key == "x") o.x = num(e);
        else if (e.key == "y") o.y = num(e);
        else if (e.key == "vx") o.vx = num(e);
        else if (e.key == "vy") o.vy = num(e);
        else if (e.key == "exit") o.may_exit = detail::to_bool(e.key, e.value);
        else if (e.key == "push") {
          std::string_view rest = e.value;
          while (!rest.empty()) {
            const auto semi = rest.find(';');
            std::string_view item = detail::trim(rest.substr(0, semi));
            rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
            if (item.empty()) continue;
            const auto colon = item.find(':');
            const auto comma = item.find(',');
            if (colon == std::string_view::npos || comma == std::string_view::npos || comma < colon)
              throw ParseError(file, e.offset, "push entries look like 'frame:vx,vy'");
            auto f = detail::parse_number<std::size_t>(detail::trim(item.substr(0, colon)));
            auto vx = detail::parse_number<double>(detail::trim(item.substr(colon + 1, comma - colon - 1)));
            auto vy = detail::parse_number<double>(detail::trim(item.substr(comma + 1)));
            if (!f || !vx || !vy) throw ParseError(file, e.offset, "bad push entry");
            o.pushes.push_back({*f, *vx, *vy});
          }
        } else {
          throw ParseError(file, e.offset, "unknown [object] key '" + e.key + "'");
        }
      }
      s.objects.push_back(std::move(o));
    } else {
      throw ParseError(file, sec.offset, "unknown section [" + sec.name + "]");
    }
  }
  if (!saw_world) throw ParseError(file, 0, "missing [world] section");
  validate(s);
  return s;
}

inline std::string_view to_string(TruthKind k) {
  switch (k) {
    case TruthKind::push: return "push";
    case TruthKind::collision: return "collision";
    default: return "exit";
  }
}

inline std::string serialize_events(const std::vector<TruthEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += std::string(to_string(e.kind)) + " " + std::to_string(e.frame) + " " + std::to_string(e.object);
    if (e.partner >= 0) out += " " + std::to_string(e.partner);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Physics

namespace detail {

inline Box object_box(const ScriptObject& o, Point p) { return {p.x, p.y, p.x + o.width, p.y + o.height}; }

inline bool fully_outside(const Box& b, const SceneScript& s) {
  return b.x_max <= 0.0 || b.y_max <= 0.0 || b.x_min >= double(s.width) || b.y_min >= double(s.height);
}

inline bool fully_inside(const Box& b, const SceneScript& s) {
  return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= double(s.width) && b.y_max <= double(s.height);
}

/// Elastic response along the axis of least penetration, masses by area.
inline void collide(const ScriptObject& a, const ScriptObject& b, const Box& ba, const Box& bb, Point& va, Point& vb) {
  const double pen_x = std::min(ba.x_max, bb.x_max) - std::max(ba.x_min, bb.x_min);
  const double pen_y = std::min(ba.y_max, bb.y_max) - std::max(ba.y_min, bb.y_min);
  const double ma = double(a.width) * a.height, mb = double(b.width) * b.height;
  auto exchange = [&](double& ua, double& ub, double direction) {
    // direction: +1 when b lies in the positive axis direction from a.
    if ((ua - ub) * direction <= 0.0) return;  // already separating
    const double na = ((ma - mb) * ua + 2.0 * mb * ub) / (ma + mb);
    const double nb = ((mb - ma) * ub + 2.0 * ma * ua) / (ma + mb);
    ua = na;
    ub = nb;
  };
  if (pen_x <= pen_y) {
    exchange(va.x, vb.x, ba.centroid().x <= bb.centroid().x ? 1.0 : -1.0);
  } else {
    exchange(va.y, vb.y, ba.centroid().y <= bb.centroid().y ? 1.0 : -1.0);
  }
}

}  // namespace detail

inline World simulate_world(const SceneScript& script) {
  validate(script);
  const std::size_t T = script.frames, N = script.objects.size();
  World w;
  w.script = script;
  w.pos.assign(N, std::vector<Point>(T));
  w.hidden.assign(N, std::vector<std::uint8_t>(T, 0));
  w.frame_order.resize(T);
  for (std::size_t f = 0; f < T; ++f) w.frame_order[f] = f;
  w.brightness.assign(T, 0);

  std::vector<Point> vel(N);
  std::vector<bool> gone(N, false);
  for (std::size_t i = 0; i < N; ++i) {
    w.pos[i][0] = {script.objects[i].x, script.objects[i].y};
    vel[i] = {script.objects[i].vx, script.objects[i].vy};
  }
  for (std::size_t f = 0; f + 1 < T; ++f) {
    for (std::size_t i = 0; i < N; ++i) {
      for (const auto& p : script.objects[i].pushes) {
        if (p.frame != f) continue;
        vel[i] = {p.vx, p.vy};
        w.events.push_back({TruthKind::push, f, int(i), -1});
      }
    }
    for (std::size_t i = 0; i < N; ++i)
      w.pos[i][f + 1] = {w.pos[i][f].x + vel[i].x, w.pos[i][f].y + vel[i].y};

    for (std::size_t i = 0; i < N; ++i) {
      const Box b = detail::object_box(script.objects[i], w.pos[i][f + 1]);
      if (gone[i] || detail::fully_inside(b, script)) continue;
      if (!script.objects[i].may_exit)
        throw ScriptError("object " + std::to_string(i) + " leaves the world at frame " + std::to_string(f + 1) +
                          " without a scripted exit");
      if (detail::fully_outside(b, script)) {
        gone[i] = true;
        w.events.push_back({TruthKind::exit, f + 1, int(i), -1});
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        if (gone[i] || gone[j]) continue;
        const auto& oi = script.objects[i];
        const auto& oj = script.objects[j];
        const Box now_i = detail::object_box(oi, w.pos[i][f + 1]), now_j = detail::object_box(oj, w.pos[j][f + 1]);
        const Box was_i = detail::object_box(oi, w.pos[i][f]), was_j = detail::object_box(oj, w.pos[j][f]);
        if (!intersects(now_i, now_j) || intersects(was_i, was_j)) continue;
        detail::collide(oi, oj, now_i, now_j, vel[i], vel[j]);
        w.events.push_back({TruthKind::collision, f + 1, int(i), int(j)});
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline long round_px(double v) { return static_cast<long>(std::floor(v + 0.5)); }

struct PixelRect {
  long x0, y0, x1, y1;  // unclipped, half-open
};

inline PixelRect pixel_rect(const ScriptObject& o, Point p) {
  const long x = round_px(p.x), y = round_px(p.y);
  return {x, y, x + o.width, y + o.height};
}

}  // namespace detail

/// Frames, exact tracks (clipped to the world, absent when no pixel shows),
/// ground-truth flow (object displacement at destination pixels, 0 on
/// background), and the truth/injection logs as bundle extras.
inline Bundle render(const World& w) {
  const SceneScript& s = w.script;
  const std::size_t T = s.frames, H = s.height, W = s.width, N = s.objects.size();
  Bundle b;
  b.tracks.meta = {s.video_id, T, H, W, 24, 1};
  b.frames = FrameTensor(T, H, W, static_cast<std::uint8_t>(s.background));
  b.flow = FlowField(T - 1, H, W);
  for (std::size_t i = 0; i < N; ++i)
    b.tracks.tracks.push_back({int(i), s.objects[i].label, std::vector<std::optional<Box>>(T)});

  std::vector<int> owner_prev, owner(H * W);
  std::vector<detail::PixelRect> rect_prev(N), rect(N);
  std::mt19937_64 rng(s.seed);
  for (std::size_t f = 0; f < T; ++f) {
    const std::size_t src = w.frame_order[f];
    std::fill(owner.begin(), owner.end(), -1);
    auto frame = b.frames->frame(f);
    for (std::size_t i = 0; i < N; ++i) {
      rect[i] = detail::pixel_rect(s.objects[i], w.pos[i][src]);
      if (w.hidden[i][src]) continue;
      const long x0 = std::max(0L, rect[i].x0), y0 = std::max(0L, rect[i].y0);
      const long x1 = std::min(long(W), rect[i].x1), y1 = std::min(long(H), rect[i].y1);
      for (long y = y0; y < y1; ++y) {
        for (long x = x0; x < x1; ++x) {
          frame[std::size_t(y) * W + std::size_t(x)] = static_cast<std::uint8_t>(s.objects[i].gray);
          owner[std::size_t(y) * W + std::size_t(x)] = int(i);
        }
      }
    }
    std::vector<bool> shows(N, false);
    for (int o : owner)
      if (o >= 0) shows[std::size_t(o)] = true;
    for (std::size_t i = 0; i < N; ++i) {
      if (!shows[i]) continue;
      const auto& r = rect[i];
      b.tracks.tracks[i].boxes[f] = Box{double(std::max(0L, r.x0)), double(std::max(0L, r.y0)),
                                        double(std::min(long(W), r.x1)), double(std::min(long(H), r.y1))};
    }
    if (f > 0) {
      for (std::size_t p = 0; p < H * W; ++p) {
        const int o = owner[p];
        if (o < 0) continue;
        b.flow->data[(f - 1) * H * W * 2 + 2 * p] = float(rect[std::size_t(o)].x0 - rect_prev[std::size_t(o)].x0);
        b.flow->data[(f - 1) * H * W * 2 + 2 * p + 1] = float(rect[std::size_t(o)].y0 - rect_prev[std::size_t(o)].y0);
      }
    }
    const int offset = w.brightness[f];
    for (auto& px : frame) {
      int v = int(px) + offset;
      if (s.noise > 0) v += int(rng() % std::uint64_t(2 * s.noise + 1)) - s.noise;
      px = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
    rect_prev = rect;
  }
  // Objects never visible cannot be represented as tracks.
  std::erase_if(b.tracks.tracks, [](const Track& t) { return !t.first_visible(); });
  b.extras[kSceneFile] = serialize_scene(s);
  b.extras[kEventsFile] = serialize_events(w.events);
  return b;
}

inline Bundle simulate(const SceneScript& script) { return render(simulate_world(script)); }

// ---------------------------------------------------------------------------
// Injections

enum class InjectionKind {
  vanish_midway,
  teleport,
  frame_swap,
  brightness_flicker,
  constant_color_filter,
  frozen_reaction,
  spontaneous_motion
};

inline constexpr std::array<InjectionKind, 7> kAllInjections = {
    InjectionKind::vanish_midway,      InjectionKind::teleport,        InjectionKind::frame_swap,
    InjectionKind::brightness_flicker, InjectionKind::constant_color_filter, InjectionKind::frozen_reaction,
    InjectionKind::spontaneous_motion};

inline std::string_view to_string(InjectionKind k) {
  switch (k) {
    case InjectionKind::vanish_midway: return "vanish_midway";
    case InjectionKind::teleport: return "teleport";
    case InjectionKind::frame_swap: return "frame_swap";
    case InjectionKind::brightness_flicker: return "brightness_flicker";
    case InjectionKind::constant_color_filter: return "constant_color_filter";
    case InjectionKind::frozen_reaction: return "frozen_reaction";
    default: return "spontaneous_motion";
  }
}

inline InjectionKind injection_kind_from_string(std::string_view s) {
  for (auto k : kAllInjections)
    if (to_string(k) == s) return k;
  throw ScriptError("unknown injection kind '" + std::string(s) + "'");
}

/// Parameters used per kind:
///   vanish_midway        object, start, end (inclusive)
///   teleport             object, frame, dx, dy
///   frame_swap           start, end (the two frames exchanged)
///   brightness_flicker   amplitude (added to every odd frame)
///   constant_color_filter amplitude (added to every frame)
///   frozen_reaction      object (struck object; -1 = first struck resting object)
///   spontaneous_motion   object, frame, dx, dy (velocity from that frame on)
struct Injection {
  InjectionKind kind = InjectionKind::vanish_midway;
  int object = -1;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t frame = 0;
  double dx = 0.0;
  double dy = 0.0;
  int amplitude = 0;

  friend bool operator==(const Injection&, const Injection&) = default;
};

inline std::string serialize_injection(const Injection& inj) {
  std::ostringstream os;
  os << to_string(inj.kind) << " object=" << inj.object << " start=" << inj.start << " end=" << inj.end
     << " frame=" << inj.frame << " dx=" << format_shortest(inj.dx) << " dy=" << format_shortest(inj.dy)
     << " amplitude=" << inj.amplitude;
  return os.str();
}

inline Injection parse_injection(std::string_view line, const std::string& file = kInjectionsFile,
                                 std::size_t offset = 0) {
  auto tok = wcs::detail::split_ws(line);
  if (tok.empty()) throw ParseError(file, offset, "empty injection");
  Injection inj;
  try {
    inj.kind = injection_kind_from_string(tok[0]);
  } catch (const ScriptError& e) {
    throw ParseError(file, offset, e.what());
  }
  for (std::size_t k = 1; k < tok.size(); ++k) {
    const auto eq = tok[k].find('=');
    if (eq == std::string_view::npos) throw ParseError(file, offset, "expected key=value");
    const std::string_view key = tok[k].substr(0, eq), val = tok[k].substr(eq + 1);
    bool ok = true;
    if (key == "object") {
      auto v = wcs::detail::parse_number<int>(val);
      ok = bool(v);
      if (v) inj.object = *v;
    } else if (key == "start" || key == "end" || key == "frame") {
      auto v = wcs::detail::parse_number<std::size_t>(val);
      ok = bool(v);
      if (v) (key == "start" ? inj.start : key == "end" ? inj.end : inj.frame) = *v;
    } else if (key == "dx" || key == "dy") {
      auto v = wcs::detail::parse_number<double>(val);
      ok = v && std::isfinite(*v);
      if (v) (key == "dx" ? inj.dx : inj.dy) = *v;
    } else if (key == "amplitude") {
      auto v = wcs::detail::parse_number<int>(val);
      ok = bool(v);
      if (v) inj.amplitude = *v;
    } else {
      throw ParseError(file, offset, "unknown injection key '" + std::string(key) + "'");
    }
    if (!ok) throw ParseError(file, offset, "bad value for '" + std::string(key) + "'");
  }
  return inj;
}

inline std::vector<Injection> parse_injection_log(std::string_view text) {
  std::vector<Injection> out;
  wcs::detail::LineReader lr(text, kInjectionsFile);
  std::size_t pos = 0;
  while (auto line = lr.next()) {
    pos = static_cast<std::size_t>(line->data() - text.data());
    out.push_back(parse_injection(*line, kInjectionsFile, pos));
  }
  return out;
}

namespace detail {

inline std::optional<std::size_t> collision_with_resting(const World& w, int& struck) {
  for (const auto& e : w.events) {
    if (e.kind != TruthKind::collision) continue;
    for (int cand : {e.object, e.partner}) {
      if (struck >= 0 && cand != struck) continue;
      const auto& p = w.pos[std::size_t(cand)];
      const std::size_t f = e.frame;
      if (f >= 1 && p[f].x == p[f - 1].x && p[f].y == p[f - 1].y) {
        struck = cand;
        return f;
      }
    }
  }
  return std::nullopt;
}

/// Frames an injection touches, for overlap rejection.
inline std::set<std::size_t> touched_frames(const Injection& inj, const World& w) {
  const std::size_t T = w.script.frames;
  std::set<std::size_t> out;
  switch (inj.kind) {
    case InjectionKind::vanish_midway:
      for (std::size_t f = inj.start; f <= inj.end && f < T; ++f) out.insert(f);
      break;
    case InjectionKind::teleport: out.insert(inj.frame); break;
    case InjectionKind::frame_swap:
      out.insert(inj.start);
      out.insert(inj.end);
      break;
    case InjectionKind::brightness_flicker:
      for (std::size_t f = 1; f < T; f += 2) out.insert(f);
      break;
    case InjectionKind::constant_color_filter:
      for (std::size_t f = 0; f < T; ++f) out.insert(f);
      break;
    case InjectionKind::frozen_reaction: {
      int struck = inj.object;
      if (auto f = collision_with_resting(w, struck))
        for (std::size_t u = *f; u < T; ++u) out.insert(u);
      break;
    }
    case InjectionKind::spontaneous_motion:
      for (std::size_t f = inj.frame; f < T; ++f) out.insert(f);
      break;
  }
  return out;
}

inline void require_object(const Injection& inj, const World& w) {
  if (inj.object < 0 || std::size_t(inj.object) >= w.script.objects.size())
    throw ScriptError(std::string(to_string(inj.kind)) + ": object " + std::to_string(inj.object) + " does not exist");
}

inline void require_in_world(const World& w, std::size_t i, Point p, std::string_view what) {
  const auto& o = w.script.objects[i];
  if (!fully_inside(object_box(o, p), w.script) && !o.may_exit)
    throw ScriptError(std::string(what) + ": object " + std::to_string(i) + " would leave the world");
}

}  // namespace detail

/// Applies one injection to the world state in place.
inline void apply_injection(World& w, const Injection& inj) {
  const std::size_t T = w.script.frames;
  const std::string what(to_string(inj.kind));
  switch (inj.kind) {
    case InjectionKind::vanish_midway: {
      detail::require_object(inj, w);
      if (inj.start > inj.end || inj.end >= T || inj.start == 0)
        throw ScriptError(what + ": need 1 <= start <= end < T");
      for (std::size_t f = inj.start; f <= inj.end; ++f) w.hidden[std::size_t(inj.object)][f] = 1;
      break;
    }
    case InjectionKind::teleport: {
      detail::require_object(inj, w);
      if (inj.frame >= T) throw ScriptError(what + ": frame out of range");
      if (inj.dx == 0.0 && inj.dy == 0.0) throw ScriptError(what + ": zero offset");
      Point& p = w.pos[std::size_t(inj.object)][inj.frame];
      const Point moved{p.x + inj.dx, p.y + inj.dy};
      detail::require_in_world(w, std::size_t(inj.object), moved, what);
      p = moved;
      break;
    }
    case InjectionKind::frame_swap: {
      if (inj.start >= T || inj.end >= T) throw ScriptError(what + ": frame out of range");
      const std::size_t lo = std::min(inj.start, inj.end), hi = std::max(inj.start, inj.end);
      if (hi - lo < 2) throw ScriptError(what + ": swapped frames must be non-adjacent");
      std::swap(w.frame_order[lo], w.frame_order[hi]);
      break;
    }
    case InjectionKind::brightness_flicker: {
      if (inj.amplitude == 0) throw ScriptError(what + ": zero amplitude");
      for (std::size_t f = 1; f < T; f += 2) w.brightness[f] += inj.amplitude;
      break;
    }
    case InjectionKind::constant_color_filter: {
      if (inj.amplitude == 0) throw ScriptError(what + ": zero amplitude");
      for (std::size_t f = 0; f < T; ++f) w.brightness[f] += inj.amplitude;
      break;
    }
    case InjectionKind::frozen_reaction: {
      int struck = inj.object;
      auto f = detail::collision_with_resting(w, struck);
      if (!f) throw ScriptError(what + ": no collision into a resting object");
      auto& p = w.pos[std::size_t(struck)];
      for (std::size_t u = *f + 1; u < T; ++u) p[u] = p[*f];
      break;
    }
    case InjectionKind::spontaneous_motion: {
      detail::require_object(inj, w);
      if (inj.frame == 0 || inj.frame + 1 >= T) throw ScriptError(what + ": need 1 <= frame < T-1");
      if (inj.dx == 0.0 && inj.dy == 0.0) throw ScriptError(what + ": zero velocity");
      auto& p = w.pos[std::size_t(inj.object)];
      if (p[inj.frame].x != p[inj.frame - 1].x || p[inj.frame].y != p[inj.frame - 1].y)
        throw ScriptError(what + ": object is not at rest at the injection frame");
      for (std::size_t u = inj.frame + 1; u < T; ++u) {
        const Point q{p[inj.frame].x + inj.dx * double(u - inj.frame), p[inj.frame].y + inj.dy * double(u - inj.frame)};
        detail::require_in_world(w, std::size_t(inj.object), q, what);
      }
      for (std::size_t u = inj.frame + 1; u < T; ++u)
        p[u] = {p[inj.frame].x + inj.dx * double(u - inj.frame), p[inj.frame].y + inj.dy * double(u - inj.frame)};
      break;
    }
  }
}

/// Re-simulates the bundle's scene, replays earlier injections, applies the
/// new ones and re-renders. Injections touching the same frames as an earlier
/// one are rejected.
inline Bundle inject(const Bundle& bundle, const std::vector<Injection>& injections) {
  auto scene_it = bundle.extras.find(kSceneFile);
  if (scene_it == bundle.extras.end())
    throw ScriptError("inject: bundle carries no scene script (" + std::string(kSceneFile) + ")");
  World w = simulate_world(parse_scene(scene_it->second));

  std::vector<Injection> all;
  if (auto it = bundle.extras.find(kInjectionsFile); it != bundle.extras.end()) all = parse_injection_log(it->second);
  all.insert(all.end(), injections.begin(), injections.end());

  std::set<std::size_t> used;
  for (std::size_t k = 0; k < all.size(); ++k) {
    for (std::size_t f : detail::touched_frames(all[k], w)) {
      if (!used.insert(f).second)
        throw ScriptError("inject: " + std::string(to_string(all[k].kind)) + " overlaps an earlier injection at frame " +
                          std::to_string(f));
    }
    apply_injection(w, all[k]);
  }
  Bundle out = render(w);
  std::string log;
  for (const auto& inj : all) log += serialize_injection(inj) + "\n";
  out.extras[kInjectionsFile] = log;
  return out;
}

inline Bundle inject(const Bundle& bundle, const Injection& injection) {
  return inject(bundle, std::vector<Injection>{injection});
}

// ---------------------------------------------------------------------------
// Standard scenes

/// 64x64x24 scene exercising a push (collision into a resting ball), a static
/// block and a resting ball away from the action.
inline SceneScript standard_scene() {
  SceneScript s;
  s.video_id = "standard";
  ScriptObject pusher{"box", 8, 8, 200, 4, 8, 1, 0, {}, false};
  ScriptObject ball{"ball", 8, 8, 60, 24, 8, 0, 0, {}, false};
  ScriptObject block{"block", 10, 10, 160, 40, 40, 0, 0, {}, false};
  ScriptObject pebble{"ball", 6, 6, 40, 10, 44, 0, 0, {}, false};
  s.objects = {pusher, ball, block, pebble};
  return s;
}

struct NamedInjection {
  std::string name;
  Injection injection;
};

/// The six corruptions used by the sensitivity suite on the standard scene.
inline std::vector<NamedInjection> standard_injections() {
  std::vector<NamedInjection> v;
  Injection i;
  i = {};
  i.kind = InjectionKind::vanish_midway, i.object = 2, i.start = 12, i.end = 23;
  v.push_back({"vanish_midway", i});
  i = {};
  i.kind = InjectionKind::brightness_flicker, i.amplitude = 20;
  v.push_back({"brightness_flicker", i});
  i = {};
  i.kind = InjectionKind::frame_swap, i.start = 6, i.end = 18;
  v.push_back({"frame_swap", i});
  i = {};
  i.kind = InjectionKind::spontaneous_motion, i.object = 3, i.frame = 10, i.dx = 1.0, i.dy = 0.0;
  v.push_back({"spontaneous_motion", i});
  i = {};
  i.kind = InjectionKind::teleport, i.object = 2, i.frame = 12, i.dx = -36.0, i.dy = 0.0;
  v.push_back({"teleport", i});
  i = {};
  i.kind = InjectionKind::constant_color_filter, i.amplitude = 10;
  v.push_back({"constant_color_filter", i});
  i = {};
  i.kind = InjectionKind::frozen_reaction, i.object = -1;
  v.push_back({"frozen_reaction", i});
  return v;
}

/// Randomized variant of the standard scene: a pusher striking an equal-sized
/// resting ball along a row near the top, a resting pebble bottom-left and a
/// static block bottom-right. Collision frame lands in [12, 16].
inline SceneScript random_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](long lo, long hi) { return lo + long(rng() % std::uint64_t(hi - lo + 1)); };
  SceneScript s;
  s.video_id = "rand" + std::to_string(seed);
  s.seed = seed;
  s.background = int(pick(80, 120));
  const int size = int(pick(6, 9));
  const long speed = 1;
  const long row = pick(4, 14);
  const long contact = pick(12, 16);
  const long x0 = pick(2, 6);
  // Pusher's right edge passes the ball's left edge for the first time at `contact`.
  const long ball_x = x0 + size + contact * speed - 1;
  ScriptObject pusher{"box", size, size, int(pick(180, 230)), double(x0), double(row), double(speed), 0, {}, false};
  ScriptObject ball{"ball", size, size, int(pick(20, 60)), double(ball_x), double(row), 0, 0, {}, false};
  const int block_size = int(pick(8, 12));
  ScriptObject block{"block", block_size, block_size, int(pick(140, 170)), double(pick(40, 60 - block_size)),
                     double(pick(36, 60 - block_size)), 0, 0, {}, false};
  ScriptObject pebble{"ball", int(pick(5, 7)), int(pick(5, 7)), int(pick(20, 50)), double(pick(4, 10)),
                      double(pick(40, 50)), 0, 0, {}, false};
  s.objects = {pusher, ball, block, pebble};
  return s;
}


/// A corruption of the given kind that applies to any random_scene() layout
/// (pusher 0, ball 1, block 2, pebble 3, contact in [12, 16]) and degrades it:
/// frame swaps stay clear of the contact so the jump has no nearby cause.
inline Injection random_injection(InjectionKind kind, const SceneScript& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  auto pick = [&](long lo, long hi) { return lo + long(rng() % std::uint64_t(hi - lo + 1)); };
  const long T = long(s.frames);
  Injection inj;
  inj.kind = kind;
  switch (kind) {
    case InjectionKind::vanish_midway:
      inj.object = int(pick(2, 3));
      inj.start = std::size_t(pick(4, 14));
      inj.end = std::size_t(std::min(T - 1, long(inj.start) + pick(3, 8)));
      break;
    case InjectionKind::teleport:
      inj.object = 2;
      inj.frame = std::size_t(pick(3, T - 3));
      inj.dx = -double(pick(25, 30));
      break;
    case InjectionKind::frame_swap:
      inj.start = std::size_t(pick(3, 4));
      inj.end = inj.start + std::size_t(pick(4, 5));
      break;
    case InjectionKind::brightness_flicker: inj.amplitude = int(pick(10, 30)); break;
    case InjectionKind::constant_color_filter: inj.amplitude = int(pick(5, 15)); break;
    case InjectionKind::frozen_reaction: inj.object = -1; break;
    case InjectionKind::spontaneous_motion:
      inj.object = 3;
      inj.frame = std::size_t(pick(6, 14));
      inj.dx = 1.0;
      break;
  }
  return inj;
}

}  // namespace wcs::sim
