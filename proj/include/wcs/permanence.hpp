#pragma once

// Object permanence: how much of each object's post-appearance lifetime it
// stays visible, with exemptions for objects that leave through a frame edge
// or disappear behind an occluder.

#include <string_view>
#include <vector>

#include "wcs/config.hpp"
#include "wcs/types.hpp"

namespace wcs {

enum class Exemption { none, boundary_exit, occluded, last_frame_exit };

inline std::string_view to_string(Exemption e) {
  switch (e) {
    case Exemption::boundary_exit: return "boundary_exit";
    case Exemption::occluded: return "occluded";
    case Exemption::last_frame_exit: return "last_frame_exit";
    default: return "none";
  }
}

struct ObjectPermanence {
  int object_id = 0;
  double persistence_ratio = 1.0;
  Exemption exemption = Exemption::none;
};

struct PermanenceReport {
  double op = 1.0;
  std::vector<ObjectPermanence> per_object;
};

/// Visible frames from first appearance to the end, over the length of that span.
inline double object_persistence(const Track& track, const VideoMeta& meta) {
  const auto start = track.first_visible();
  if (!start) return 0.0;
  std::size_t present = 0;
  for (std::size_t t = *start; t < meta.frame_count; ++t) present += track.visible(t) ? 1 : 0;
  return double(present) / double(meta.frame_count - *start);
}

namespace detail {

inline bool exits_through_edge(const Track& track, std::size_t last, const VideoMeta& meta,
                               const PermanenceParams& params) {
  std::vector<Point> path;
  for (std::size_t t = last + 1; t-- > 0 && path.size() < std::size_t(params.k_exit);)
    if (track.boxes[t]) path.push_back(track.boxes[t]->centroid());
  if (path.size() < 2) return false;
  std::reverse(path.begin(), path.end());

  const Box& final_box = *track.boxes[last];
  const double m = params.edge_margin(meta.height, meta.width);
  const double W = double(meta.width), H = double(meta.height);
  struct Edge {
    double (*dist)(Point, double, double);
    bool in_band;
  };
  const Edge edges[] = {
      {[](Point p, double, double) { return p.x; }, final_box.x_min < m},
      {[](Point p, double w, double) { return w - p.x; }, final_box.x_max > W - m},
      {[](Point p, double, double) { return p.y; }, final_box.y_min < m},
      {[](Point p, double, double h) { return h - p.y; }, final_box.y_max > H - m},
  };
  for (const auto& e : edges) {
    if (!e.in_band) continue;
    bool monotone = true;
    for (std::size_t k = 1; k < path.size() && monotone; ++k)
      monotone = e.dist(path[k], W, H) <= e.dist(path[k - 1], W, H);
    if (monotone && e.dist(path.back(), W, H) < e.dist(path.front(), W, H)) return true;
  }
  return false;
}

inline bool hidden_by_occluder(const Track& track, std::size_t last, const TrackSet& scene,
                               const PermanenceParams& params) {
  const Box& box = *track.boxes[last];
  const double area = box.area();
  if (area <= 0.0) return false;
  for (const auto& other : scene.tracks) {
    if (other.object_id == track.object_id) continue;
    // The occluder may be checked where the object was last seen or where it vanished.
    for (std::size_t t : {last, last + 1}) {
      if (!other.visible(t)) continue;
      if (intersection_area(*other.boxes[t], box) / area >= params.theta_occ) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Classifies the disappearance that follows the visible frame `last`.
inline Exemption classify_gap(const Track& track, std::size_t last, const TrackSet& scene,
                              const PermanenceParams& params) {
  const VideoMeta& meta = scene.meta;
  if (detail::exits_through_edge(track, last, meta, params)) return Exemption::boundary_exit;
  if (detail::hidden_by_occluder(track, last, scene, params)) return Exemption::occluded;
  if (last + 2 == meta.frame_count) return Exemption::last_frame_exit;
  return Exemption::none;
}

/// An object is exempt only if every one of its disappearances is; the
/// reported kind is that of the final disappearance.
inline Exemption classify_disappearance(const Track& track, const TrackSet& scene, const PermanenceParams& params) {
  const auto start = track.first_visible();
  if (!start) return Exemption::none;
  Exemption kind = Exemption::none;
  bool any = false;
  for (std::size_t t = *start; t + 1 < scene.meta.frame_count; ++t) {
    if (!(track.visible(t) && !track.visible(t + 1))) continue;
    any = true;
    kind = classify_gap(track, t, scene, params);
    if (kind == Exemption::none) return Exemption::none;
  }
  return any ? kind : Exemption::none;
}

inline PermanenceReport compute_op(const TrackSet& scene, const PermanenceParams& params = {}) {
  PermanenceReport rep;
  if (scene.tracks.empty()) return rep;
  double sum = 0.0;
  for (const auto& tr : scene.tracks) {
    ObjectPermanence obj{tr.object_id, object_persistence(tr, scene.meta), Exemption::none};
    if (obj.persistence_ratio < 1.0) obj.exemption = classify_disappearance(tr, scene, params);
    sum += obj.exemption == Exemption::none ? obj.persistence_ratio : 1.0;
    rep.per_object.push_back(obj);
  }
  rep.op = std::clamp(sum / double(scene.tracks.size()), 0.0, 1.0);
  return rep;
}

}  // namespace wcs
