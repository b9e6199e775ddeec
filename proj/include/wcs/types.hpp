#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcs/error.hpp"

namespace wcs {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned box in pixel coordinates, half-open on the max side.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double diagonal() const { return std::hypot(width(), height()); }
  Point centroid() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  Box translated(double dx, double dy) const {
    return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
  }
  Box dilated(double r) const { return {x_min - r, y_min - r, x_max + r, y_max + r}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Positive-area overlap.
inline bool intersects(const Box& a, const Box& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

/// Euclidean gap between two boxes; 0 when they touch or overlap.
inline double box_gap(const Box& a, const Box& b) {
  const double gx = std::max({0.0, a.x_min - b.x_max, b.x_min - a.x_max});
  const double gy = std::max({0.0, a.y_min - b.y_max, b.y_min - a.y_max});
  return std::hypot(gx, gy);
}

struct VideoMeta {
  std::string video_id;
  std::size_t frame_count = 0;  // T
  std::size_t height = 0;
  std::size_t width = 0;
  std::uint32_t fps_num = 24;
  std::uint32_t fps_den = 1;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

struct Track {
  int object_id = 0;
  std::string label;
  std::vector<std::optional<Box>> boxes;  // one slot per frame

  bool visible(std::size_t t) const { return t < boxes.size() && boxes[t].has_value(); }

  std::optional<std::size_t> first_visible() const {
    for (std::size_t t = 0; t < boxes.size(); ++t)
      if (boxes[t]) return t;
    return std::nullopt;
  }
  std::optional<std::size_t> last_visible() const {
    for (std::size_t t = boxes.size(); t-- > 0;)
      if (boxes[t]) return t;
    return std::nullopt;
  }

  friend bool operator==(const Track&, const Track&) = default;
};

struct TrackSet {
  VideoMeta meta;
  std::vector<Track> tracks;

  const Track* find(int object_id) const {
    for (const auto& tr : tracks)
      if (tr.object_id == object_id) return &tr;
    return nullptr;
  }

  friend bool operator==(const TrackSet&, const TrackSet&) = default;
};

/// Stack of T grayscale 8-bit frames, row-major.
struct FrameTensor {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;

  FrameTensor() = default;
  FrameTensor(std::size_t t, std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : frames(t), height(h), width(w), data(t * h * w, fill) {}

  std::size_t frame_size() const { return height * width; }
  std::span<std::uint8_t> frame(std::size_t t) {
    return {data.data() + t * frame_size(), frame_size()};
  }
  std::span<const std::uint8_t> frame(std::size_t t) const {
    return {data.data() + t * frame_size(), frame_size()};
  }
  std::uint8_t& at(std::size_t t, std::size_t y, std::size_t x) {
    return data[t * frame_size() + y * width + x];
  }
  std::uint8_t at(std::size_t t, std::size_t y, std::size_t x) const {
    return data[t * frame_size() + y * width + x];
  }

  friend bool operator==(const FrameTensor&, const FrameTensor&) = default;
};

/// T-1 dense flow maps, each H x W x (dx, dy), mapping frame t to t+1.
struct FlowField {
  std::size_t maps = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  FlowField() = default;
  FlowField(std::size_t n, std::size_t h, std::size_t w)
      : maps(n), height(h), width(w), data(n * h * w * 2, 0.0f) {}

  std::size_t map_size() const { return height * width * 2; }
  std::span<float> map(std::size_t t) { return {data.data() + t * map_size(), map_size()}; }
  std::span<const float> map(std::size_t t) const {
    return {data.data() + t * map_size(), map_size()};
  }
  float& dx(std::size_t t, std::size_t y, std::size_t x) {
    return data[t * map_size() + (y * width + x) * 2];
  }
  float& dy(std::size_t t, std::size_t y, std::size_t x) {
    return data[t * map_size() + (y * width + x) * 2 + 1];
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct HumanScoreRecord {
  std::string video_id;
  double score = 0.0;

  friend bool operator==(const HumanScoreRecord&, const HumanScoreRecord&) = default;
};

struct SubmetricVector {
  double op = 1.0;
  double rs = 1.0;
  double cc = 1.0;
  double fp = 0.0;

  friend bool operator==(const SubmetricVector&, const SubmetricVector&) = default;
};

inline void validate(const SubmetricVector& s) {
  for (double v : {s.op, s.rs, s.cc, s.fp})
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError("submetric outside [0,1] or not finite");
}

struct WeightVector {
  double w_op = 0.25;
  double w_rs = 0.25;
  double w_cc = 0.25;
  double w_fp = 0.25;
  double b = 0.0;

  static WeightVector equal() { return {}; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

inline void validate(const WeightVector& w) {
  for (double v : {w.w_op, w.w_rs, w.w_cc, w.w_fp, w.b})
    if (!std::isfinite(v)) throw ValidationError("weight not finite");
  for (double v : {w.w_op, w.w_rs, w.w_cc, w.w_fp})
    if (v < 0.0) throw ValidationError("negative weight: w_* >= 0 required");
}

}  // namespace wcs
