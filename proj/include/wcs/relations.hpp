#pragma once

// Relation stability: pairwise spatial relations (centroid distance, left/
// above ordering, contact) tracked over time, with abrupt changes counted as
// events.

#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "wcs/config.hpp"
#include "wcs/types.hpp"

namespace wcs {

struct RelationSample {
  double distance = 0.0;
  bool i_left_of_j = false;
  bool i_above_j = false;
  bool contact = false;
};

struct RelationSeries {
  int object_i = 0;
  int object_j = 0;
  /// Per frame; defined only where both objects are visible.
  std::vector<std::optional<RelationSample>> samples;
  /// Each object's own boxes, for the motion test.
  std::vector<std::optional<Box>> boxes_i;
  std::vector<std::optional<Box>> boxes_j;

  bool defined(std::size_t t) const { return t < samples.size() && samples[t].has_value(); }

  /// Frames t whose predecessor t-1 is also co-visible.
  std::size_t transitions() const {
    std::size_t n = 0;
    for (std::size_t t = 1; t < samples.size(); ++t) n += (defined(t) && defined(t - 1)) ? 1 : 0;
    return n;
  }
};

enum class RelationEventKind { order_flip_x, order_flip_y, contact_change, distance_jump };

inline std::string_view to_string(RelationEventKind k) {
  switch (k) {
    case RelationEventKind::order_flip_x: return "order_flip_x";
    case RelationEventKind::order_flip_y: return "order_flip_y";
    case RelationEventKind::contact_change: return "contact_change";
    default: return "distance_jump";
  }
}

struct RelationEvent {
  int object_i = 0;
  int object_j = 0;
  std::size_t frame = 0;
  RelationEventKind kind = RelationEventKind::distance_jump;
  double magnitude = 0.0;
};

inline RelationSample relation_between(const Box& a, const Box& b) {
  const Point ca = a.centroid(), cb = b.centroid();
  return {distance(ca, cb), ca.x < cb.x, ca.y < cb.y, intersects(a, b)};
}

/// One series per unordered pair that coexists in at least two frames.
inline std::vector<RelationSeries> build_relation_series(const TrackSet& scene) {
  std::vector<RelationSeries> out;
  const std::size_t T = scene.meta.frame_count;
  for (std::size_t a = 0; a < scene.tracks.size(); ++a) {
    for (std::size_t b = a + 1; b < scene.tracks.size(); ++b) {
      const Track& ti = scene.tracks[a];
      const Track& tj = scene.tracks[b];
      RelationSeries s{ti.object_id, tj.object_id, std::vector<std::optional<RelationSample>>(T), ti.boxes, tj.boxes};
      std::size_t together = 0;
      for (std::size_t t = 0; t < T; ++t) {
        if (ti.visible(t) && tj.visible(t)) {
          s.samples[t] = relation_between(*ti.boxes[t], *tj.boxes[t]);
          ++together;
        }
      }
      if (together >= 2) out.push_back(std::move(s));
    }
  }
  return out;
}

namespace detail {

/// How far an object's displacement into frame t departs from its previous
/// displacement (zero previous motion when t-2 is unseen).
inline double motion_deviation(const std::vector<std::optional<Box>>& boxes, std::size_t t) {
  const Point now = boxes[t]->centroid(), prev = boxes[t - 1]->centroid();
  Point expected{0.0, 0.0};
  if (t >= 2 && boxes[t - 2]) {
    const Point before = boxes[t - 2]->centroid();
    expected = {prev.x - before.x, prev.y - before.y};
  }
  return std::hypot(now.x - prev.x - expected.x, now.y - prev.y - expected.y);
}

}  // namespace detail

/// Events for one pair. A distance jump fires when the change in centroid
/// distance exceeds tau_jump mean box diagonals. Ordering and contact flips
/// fire only when at least one of the two objects breaks its own motion by
/// more than its box diagonal in that frame; flips produced by continuous
/// motion are legitimate crossings or contacts.
inline std::vector<RelationEvent> detect_relation_events(const RelationSeries& s, const RelationParams& params = {}) {
  std::vector<RelationEvent> out;
  for (std::size_t t = 1; t < s.samples.size(); ++t) {
    if (!s.defined(t) || !s.defined(t - 1)) continue;
    const RelationSample& now = *s.samples[t];
    const RelationSample& prev = *s.samples[t - 1];
    const Box& bi = *s.boxes_i[t];
    const Box& bj = *s.boxes_j[t];

    const double jump = std::abs(now.distance - prev.distance);
    const double scale = 0.5 * (bi.diagonal() + bj.diagonal());
    if (jump > params.tau_jump * scale)
      out.push_back({s.object_i, s.object_j, t, RelationEventKind::distance_jump, jump});

    const double dev_i = detail::motion_deviation(s.boxes_i, t);
    const double dev_j = detail::motion_deviation(s.boxes_j, t);
    const bool abrupt = dev_i > bi.diagonal() || dev_j > bj.diagonal();
    if (!abrupt) continue;
    const double mag = std::max(dev_i, dev_j);
    if (now.i_left_of_j != prev.i_left_of_j)
      out.push_back({s.object_i, s.object_j, t, RelationEventKind::order_flip_x, mag});
    if (now.i_above_j != prev.i_above_j)
      out.push_back({s.object_i, s.object_j, t, RelationEventKind::order_flip_y, mag});
    if (now.contact != prev.contact)
      out.push_back({s.object_i, s.object_j, t, RelationEventKind::contact_change, mag});
  }
  return out;
}

struct RelationReport {
  double rs = 1.0;
  std::size_t pairs = 0;  // M
  std::vector<RelationEvent> events;
};

/// RS = 1 - mean over pairs of (event frames / co-visible transitions).
inline RelationReport compute_rs(const TrackSet& scene, const RelationParams& params = {}) {
  RelationReport rep;
  double total = 0.0;
  for (const auto& s : build_relation_series(scene)) {
    const std::size_t n = s.transitions();
    if (n == 0) continue;
    ++rep.pairs;
    auto events = detect_relation_events(s, params);
    std::set<std::size_t> frames;
    for (const auto& e : events) frames.insert(e.frame);
    total += double(frames.size()) / double(n);
    rep.events.insert(rep.events.end(), events.begin(), events.end());
  }
  if (rep.pairs > 0) rep.rs = std::clamp(1.0 - total / double(rep.pairs), 0.0, 1.0);
  return rep;
}

}  // namespace wcs
