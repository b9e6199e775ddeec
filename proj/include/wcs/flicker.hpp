#pragma once

// Flicker penalty: each frame is predicted from its predecessor by backward
// warping along the flow, and the normalized L1 residual of the prediction
// measures change that motion does not explain.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "wcs/config.hpp"
#include "wcs/types.hpp"

namespace wcs {

struct WarpResult {
  std::vector<double> predicted;
  std::vector<std::uint8_t> valid;  // 1 where the source sample was inside the frame
};

/// Backward bilinear warp. The flow is expressed at destination pixels and
/// maps t to t+1, so predicted(x, y) samples the source at (x - dx, y - dy).
inline WarpResult warp_frame(std::span<const std::uint8_t> source, std::span<const float> flow, std::size_t height,
                             std::size_t width) {
  if (source.size() != height * width || flow.size() != height * width * 2)
    throw ValidationError("warp_frame: frame and flow shapes disagree");
  WarpResult out{std::vector<double>(height * width, 0.0), std::vector<std::uint8_t>(height * width, 0)};
  const double max_x = double(width) - 1.0, max_y = double(height) - 1.0;
  constexpr double kEdgeTol = 1e-9;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t i = y * width + x;
      double sx = double(x) - double(flow[2 * i]);
      double sy = double(y) - double(flow[2 * i + 1]);
      if (sx < -kEdgeTol || sy < -kEdgeTol || sx > max_x + kEdgeTol || sy > max_y + kEdgeTol) continue;
      sx = std::clamp(sx, 0.0, max_x);
      sy = std::clamp(sy, 0.0, max_y);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const auto y0 = static_cast<std::size_t>(std::floor(sy));
      const std::size_t x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
      const double fx = sx - double(x0), fy = sy - double(y0);
      auto px = [&](std::size_t yy, std::size_t xx) { return double(source[yy * width + xx]); };
      const double top = px(y0, x0) * (1.0 - fx) + px(y0, x1) * fx;
      const double bottom = px(y1, x0) * (1.0 - fx) + px(y1, x1) * fx;
      out.predicted[i] = top * (1.0 - fy) + bottom * fy;
      out.valid[i] = 1;
    }
  }
  return out;
}

struct Residual {
  double epsilon = 0.0;  // clamped to [0, 1]
  double raw = 0.0;      // unclamped ratio, used for shot-cut detection
  bool degenerate = false;
};

/// Normalized L1 residual over valid pixels, per-pixel differences clamped
/// at c_max * 255. An all-zero actual frame yields 0 with the degenerate flag.
inline Residual flicker_residual(std::span<const std::uint8_t> actual, std::span<const double> predicted,
                                 std::span<const std::uint8_t> valid, double c_max = 0.5) {
  if (actual.size() != predicted.size() || actual.size() != valid.size())
    throw ValidationError("flicker_residual: buffer sizes disagree");
  const double cap = c_max * 255.0;
  double num = 0.0, raw_num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!valid[i]) continue;
    const double diff = std::abs(double(actual[i]) - predicted[i]);
    raw_num += diff;
    num += std::min(diff, cap);
    den += double(actual[i]);
  }
  if (den <= 0.0) return {0.0, 0.0, true};
  return {std::min(1.0, num / den), raw_num / den, false};
}

struct FlickerSeries {
  std::vector<double> residuals;       // epsilon per transition
  std::vector<double> raw_residuals;   // before clamping
  std::vector<double> mask_coverage;   // fraction of pixels that entered the residual
  std::vector<std::uint8_t> cut_flags;
  std::vector<std::uint8_t> degenerate_flags;
  double fp = 0.0;
};

namespace detail {

/// Pixels covered by boxes of objects that move (or appear/vanish) between t and t+1.
inline std::vector<std::uint8_t> moving_object_mask(const TrackSet& scene, std::size_t t, std::size_t height,
                                                    std::size_t width, double dilation) {
  std::vector<std::uint8_t> mask(height * width, 0);
  auto paint = [&](const Box& b) {
    const Box d = b.dilated(dilation);
    const auto x0 = static_cast<long>(std::floor(std::max(0.0, d.x_min)));
    const auto y0 = static_cast<long>(std::floor(std::max(0.0, d.y_min)));
    const auto x1 = static_cast<long>(std::ceil(std::min(double(width), d.x_max)));
    const auto y1 = static_cast<long>(std::ceil(std::min(double(height), d.y_max)));
    for (long y = y0; y < y1; ++y)
      for (long x = x0; x < x1; ++x) mask[std::size_t(y) * width + std::size_t(x)] = 1;
  };
  for (const auto& tr : scene.tracks) {
    const auto& a = tr.boxes[t];
    const auto& b = tr.boxes[t + 1];
    if (a && b && *a == *b) continue;
    if (a) paint(*a);
    if (b) paint(*b);
  }
  return mask;
}

}  // namespace detail

/// Mean residual over transitions. With tracks and static-region mode, pixels
/// of moving objects are excluded; with cut exclusion, transitions whose raw
/// residual exceeds tau_cut are dropped from the mean (always flagged).
inline FlickerSeries compute_fp(const FrameTensor& frames, const FlowField& flow, const TrackSet* scene,
                                const FlickerParams& params = {}) {
  if (flow.maps + 1 != frames.frames || flow.height != frames.height || flow.width != frames.width)
    throw ValidationError("compute_fp: frames and flow are inconsistent");
  const std::size_t H = frames.height, W = frames.width;
  FlickerSeries s;
  const bool masked = scene != nullptr && params.static_region_mode;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t + 1 < frames.frames; ++t) {
    WarpResult warp = warp_frame(frames.frame(t), flow.map(t), H, W);
    if (masked) {
      const auto mask = detail::moving_object_mask(*scene, t, H, W, params.dilation);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) warp.valid[i] = 0;
    }
    std::size_t covered = 0;
    for (auto v : warp.valid) covered += v;
    const Residual r = flicker_residual(frames.frame(t + 1), warp.predicted, warp.valid, params.c_max);
    const bool cut = r.raw > params.tau_cut;
    s.residuals.push_back(r.epsilon);
    s.raw_residuals.push_back(r.raw);
    s.mask_coverage.push_back(double(covered) / double(H * W));
    s.cut_flags.push_back(cut ? 1 : 0);
    s.degenerate_flags.push_back(r.degenerate ? 1 : 0);
    if (params.cut_exclusion && cut) continue;
    sum += r.epsilon;
    ++used;
  }
  s.fp = used > 0 ? std::clamp(sum / double(used), 0.0, 1.0) : 0.0;
  return s;
}

}  // namespace wcs
