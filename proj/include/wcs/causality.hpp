#pragma once

// Causal compliance: motion-state changes and collisions detected from track
// kinematics, each checked for a plausible cause (contact, agency) or an
// expected effect (the struck object reacts).

#include <algorithm>
#include <optional>
#include <string_view>
#include <vector>

#include "wcs/config.hpp"
#include "wcs/types.hpp"

namespace wcs {

struct ObjectKinematics {
  int object_id = 0;
  std::string label;
  std::vector<std::optional<Point>> position;
  std::vector<std::optional<Point>> velocity;      // px/frame
  std::vector<std::optional<Point>> acceleration;  // px/frame^2
  std::vector<std::optional<double>> speed;
  std::vector<std::optional<bool>> moving;
  std::vector<std::optional<Box>> boxes;
};

struct KinematicsSeries {
  std::size_t frames = 0;
  std::vector<ObjectKinematics> objects;

  const ObjectKinematics* find(int id) const {
    for (const auto& o : objects)
      if (o.object_id == id) return &o;
    return nullptr;
  }
};

enum class CausalEventKind { motion_onset, motion_stop, sudden_velocity_change, collision };
enum class ViolationKind { none, effect_without_cause, cause_without_effect };

inline std::string_view to_string(CausalEventKind k) {
  switch (k) {
    case CausalEventKind::motion_onset: return "motion_onset";
    case CausalEventKind::motion_stop: return "motion_stop";
    case CausalEventKind::sudden_velocity_change: return "sudden_velocity_change";
    default: return "collision";
  }
}

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::effect_without_cause: return "effect_without_cause";
    case ViolationKind::cause_without_effect: return "cause_without_effect";
    default: return "none";
  }
}

struct EventRecord {
  CausalEventKind kind = CausalEventKind::motion_onset;
  int object_id = 0;
  std::optional<int> partner_id;  // collisions only
  std::size_t frame = 0;
  bool explained = true;
  ViolationKind violation = ViolationKind::none;
};

struct CausalReport {
  double cc = 1.0;
  std::size_t n_events = 0;
  std::vector<EventRecord> events;
  std::vector<EventRecord> violations;
  std::vector<double> motion_energy;  // per frame, sum of squared speeds
};

/// Finite differences over each visible run of at least three frames:
/// central in the interior, one-sided at run ends for velocity; second
/// differences at interior frames for acceleration.
inline KinematicsSeries compute_kinematics(const TrackSet& scene, const CausalityParams& params = {}) {
  KinematicsSeries kin;
  const std::size_t T = scene.meta.frame_count;
  kin.frames = T;
  for (const auto& tr : scene.tracks) {
    ObjectKinematics o;
    o.object_id = tr.object_id;
    o.label = tr.label;
    o.boxes = tr.boxes;
    o.position.resize(T);
    o.velocity.resize(T);
    o.acceleration.resize(T);
    o.speed.resize(T);
    o.moving.resize(T);
    for (std::size_t t = 0; t < T; ++t)
      if (tr.boxes[t]) o.position[t] = tr.boxes[t]->centroid();

    std::size_t t = 0;
    while (t < T) {
      if (!o.position[t]) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end + 1 < T && o.position[end + 1]) ++end;
      if (end - t + 1 >= 3) {
        for (std::size_t u = t; u <= end; ++u) {
          const std::size_t lo = (u == t) ? u : u - 1;
          const std::size_t hi = (u == end) ? u : u + 1;
          const Point a = *o.position[lo], b = *o.position[hi];
          const double span = double(hi - lo);
          o.velocity[u] = Point{(b.x - a.x) / span, (b.y - a.y) / span};
          o.speed[u] = std::hypot(o.velocity[u]->x, o.velocity[u]->y);
          o.moving[u] = *o.speed[u] > params.v_min;
          if (u > t && u < end) {
            const Point p = *o.position[u - 1], c = *o.position[u], n = *o.position[u + 1];
            o.acceleration[u] = Point{n.x - 2.0 * c.x + p.x, n.y - 2.0 * c.y + p.y};
          }
        }
      }
      t = end + 1;
    }
    kin.objects.push_back(std::move(o));
  }
  return kin;
}

/// Onsets/stops on moving-bit flips, sudden velocity changes on acceleration
/// above alpha_max box diagonals, and collisions on first box overlap with a
/// closing speed above v_min. Events come out pending (explained = true).
inline std::vector<EventRecord> detect_motion_events(const KinematicsSeries& kin, const CausalityParams& params = {}) {
  std::vector<EventRecord> out;
  for (const auto& o : kin.objects) {
    for (std::size_t t = 0; t < kin.frames; ++t) {
      if (t > 0 && o.moving[t] && o.moving[t - 1] && *o.moving[t] != *o.moving[t - 1])
        out.push_back({*o.moving[t] ? CausalEventKind::motion_onset : CausalEventKind::motion_stop, o.object_id,
                       std::nullopt, t});
      if (o.acceleration[t]) {
        const double a = std::hypot(o.acceleration[t]->x, o.acceleration[t]->y);
        if (a > params.alpha_max * o.boxes[t]->diagonal())
          out.push_back({CausalEventKind::sudden_velocity_change, o.object_id, std::nullopt, t});
      }
    }
  }
  for (std::size_t a = 0; a < kin.objects.size(); ++a) {
    for (std::size_t b = a + 1; b < kin.objects.size(); ++b) {
      const auto& oa = kin.objects[a];
      const auto& ob = kin.objects[b];
      for (std::size_t t = 1; t < kin.frames; ++t) {
        if (!(oa.boxes[t] && ob.boxes[t] && oa.boxes[t - 1] && ob.boxes[t - 1])) continue;
        if (intersects(*oa.boxes[t - 1], *ob.boxes[t - 1]) || !intersects(*oa.boxes[t], *ob.boxes[t])) continue;
        const double closing = distance(*oa.position[t - 1], *ob.position[t - 1]) -
                               distance(*oa.position[t], *ob.position[t]);
        if (closing <= params.v_min) continue;
        // The striker is the faster of the two just before contact.
        const double sa = oa.speed[t - 1].value_or(0.0), sb = ob.speed[t - 1].value_or(0.0);
        const bool a_strikes = sa >= sb;
        out.push_back({CausalEventKind::collision, a_strikes ? oa.object_id : ob.object_id,
                       a_strikes ? ob.object_id : oa.object_id, t});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& x, const EventRecord& y) {
    if (x.frame != y.frame) return x.frame < y.frame;
    if (x.object_id != y.object_id) return x.object_id < y.object_id;
    return x.kind < y.kind;
  });
  return out;
}

namespace detail {

inline bool is_agent(const std::string& label, const CausalityParams& params) {
  return std::find(params.agent_classes.begin(), params.agent_classes.end(), label) != params.agent_classes.end();
}

/// Another object came within p_near of this one during [t - w_cause, t].
inline bool has_nearby_cause(const ObjectKinematics& o, std::size_t t, const KinematicsSeries& kin,
                             const CausalityParams& params) {
  const std::size_t from = t >= std::size_t(params.w_cause) ? t - std::size_t(params.w_cause) : 0;
  for (std::size_t u = from; u <= t; ++u) {
    if (!o.boxes[u]) continue;
    const double margin = params.p_near_frac * o.boxes[u]->diagonal();
    for (const auto& other : kin.objects) {
      if (other.object_id == o.object_id || !other.boxes[u]) continue;
      if (box_gap(*o.boxes[u], *other.boxes[u]) <= margin) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Motion-state changes need a cause at or before t; a collision into a
/// resting object needs that object to start moving within w_effect frames.
inline std::vector<EventRecord> check_causes(std::vector<EventRecord> events, const KinematicsSeries& kin,
                                             const CausalityParams& params = {}) {
  for (auto& e : events) {
    const ObjectKinematics* o = kin.find(e.object_id);
    if (e.kind == CausalEventKind::collision) {
      const ObjectKinematics* struck = kin.find(*e.partner_id);
      const double before = struck->speed[e.frame - 1].value_or(0.0);
      if (before >= params.v_min) continue;  // both were moving: nothing to check
      bool observed = false, reacted = false;
      for (std::size_t u = e.frame; u < kin.frames && u <= e.frame + std::size_t(params.w_effect); ++u) {
        if (!struck->speed[u]) continue;
        observed = true;
        reacted = reacted || *struck->speed[u] >= params.v_min;
      }
      if (observed && !reacted) {
        e.explained = false;
        e.violation = ViolationKind::cause_without_effect;
      }
      continue;
    }
    if (detail::is_agent(o->label, params)) continue;
    if (!detail::has_nearby_cause(*o, e.frame, kin, params)) {
      e.explained = false;
      e.violation = ViolationKind::effect_without_cause;
    }
  }
  return events;
}

inline std::vector<double> motion_energy(const KinematicsSeries& kin) {
  std::vector<double> energy(kin.frames, 0.0);
  for (const auto& o : kin.objects)
    for (std::size_t t = 0; t < kin.frames; ++t)
      if (o.speed[t]) energy[t] += *o.speed[t] * *o.speed[t];
  return energy;
}

inline CausalReport compute_cc(const TrackSet& scene, const CausalityParams& params = {}) {
  CausalReport rep;
  const auto kin = compute_kinematics(scene, params);
  rep.events = check_causes(detect_motion_events(kin, params), kin, params);
  rep.n_events = rep.events.size();
  for (const auto& e : rep.events)
    if (e.violation != ViolationKind::none) rep.violations.push_back(e);
  if (rep.n_events > 0) rep.cc = 1.0 - double(rep.violations.size()) / double(rep.n_events);
  rep.motion_energy = motion_energy(kin);
  return rep;
}

}  // namespace wcs
