#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles/brute_force.hpp"
#include "oracles/nnls_enum.hpp"
#include "oracles/stats_ref.hpp"
#include "wcs/wcs.hpp"

namespace wcs::testing {

namespace fs = std::filesystem;

/// Fresh empty directory under the system temp dir, unique per test name.
inline fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("wcs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline TrackSet make_scene(std::size_t T, std::size_t H = 64, std::size_t W = 64) {
  TrackSet ts;
  ts.meta = {"v", T, H, W, 24, 1};
  return ts;
}

/// Appends a track; `boxes` has one optional per frame.
inline Track& add_track(TrackSet& ts, int id, std::string label, std::vector<std::optional<Box>> boxes) {
  ts.tracks.push_back({id, std::move(label), std::move(boxes)});
  return ts.tracks.back();
}

/// Axis-aligned box of size w x h whose top-left follows (x[t], y[t]).
inline std::vector<std::optional<Box>> path(const std::vector<double>& x, const std::vector<double>& y, double w,
                                            double h) {
  std::vector<std::optional<Box>> out;
  for (std::size_t t = 0; t < x.size(); ++t) out.push_back(Box{x[t], y[t], x[t] + w, y[t] + h});
  return out;
}

inline oracle::Scene to_oracle(const TrackSet& ts) {
  oracle::Scene s;
  s.T = int(ts.meta.frame_count);
  s.H = int(ts.meta.height);
  s.W = int(ts.meta.width);
  for (const auto& tr : ts.tracks) {
    oracle::Obj o;
    o.id = tr.object_id;
    o.label = tr.label;
    for (const auto& b : tr.boxes) {
      o.vis.push_back(b ? 1 : 0);
      o.box.push_back(b ? std::array<double, 4>{b->x_min, b->y_min, b->x_max, b->y_max} : std::array<double, 4>{});
    }
    s.objs.push_back(std::move(o));
  }
  return s;
}

/// Random hand-style track set: a few objects on piecewise-linear paths with
/// gaps, teleports, stops and edge exits mixed in.
inline TrackSet random_tracks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const std::size_t T = 6 + rng() % 14;
  TrackSet ts = make_scene(T, 48, 64);
  const int n = 1 + int(rng() % 5);
  const char* labels[] = {"ball", "box", "person", "car"};
  for (int k = 0; k < n; ++k) {
    const double w = std::round(uni(3, 14)), h = std::round(uni(3, 14));
    double x = std::round(uni(-4, 60)), y = std::round(uni(-4, 44));
    double vx = coin(0.3) ? 0.0 : std::round(uni(-4, 4)), vy = coin(0.5) ? 0.0 : std::round(uni(-3, 3));
    const std::size_t first = coin(0.3) ? rng() % T : 0;
    std::vector<std::optional<Box>> boxes(T);
    for (std::size_t t = first; t < T; ++t) {
      if (coin(0.1)) vx = coin(0.5) ? 0.0 : std::round(uni(-5, 5));
      if (coin(0.05)) x += std::round(uni(-30, 30));
      x += vx;
      y += vy;
      const Box b{std::max(x, 0.0), std::max(y, 0.0), std::min(x + w, 64.0), std::min(y + h, 48.0)};
      if (!coin(0.15) && b.x_min < b.x_max && b.y_min < b.y_max) boxes[t] = b;
    }
    if (std::none_of(boxes.begin(), boxes.end(), [](const auto& b) { return b.has_value(); }))
      boxes[T - 1] = Box{10, 10, 14, 14};
    add_track(ts, k, labels[rng() % 4], std::move(boxes));
  }
  // Occasionally stack a small box inside a bigger one, then drop it.
  if (coin(0.4) && ts.tracks.size() >= 2) {
    auto& big = ts.tracks[0];
    auto& small = ts.tracks[1];
    for (std::size_t t = 0; t < T; ++t) {
      if (!big.boxes[t]) continue;
      const Box& b = *big.boxes[t];
      small.boxes[t] = Box{b.x_min + 1, b.y_min + 1, b.x_min + 2, b.y_min + 2};
      if (t + 1 < T) small.boxes[t + 1].reset();
      break;
    }
  }
  return ts;
}

inline SubmetricVector random_submetrics(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SubmetricVector s;
  s.op = u(rng);
  s.rs = u(rng);
  s.cc = u(rng);
  s.fp = u(rng);
  return s;
}

/// Samples from target = w . (op, rs, cc, -fp) + b + noise.
inline std::vector<Sample> planted(std::size_t n, const std::array<double, 4>& w, double b, double sigma,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  std::vector<Sample> out;
  for (std::size_t k = 0; k < n; ++k) {
    const SubmetricVector s = random_submetrics(rng);
    double y = w[0] * s.op + w[1] * s.rs + w[2] * s.cc - w[3] * s.fp + b;
    if (sigma > 0) y += noise(rng);
    out.push_back({s, y});
  }
  return out;
}

/// Small fit whose unconstrained optimum has at least one negative weight.
inline std::vector<Sample> negative_optimum_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<double, 4> w{};
  for (auto& v : w) v = u(rng);
  w[rng() % 4] = -0.5 - 0.5 * std::abs(u(rng));
  return planted(6 + rng() % 10, w, u(rng), 0.05, rng());
}

inline std::vector<std::array<double, 4>> rows_of(const std::vector<Sample>& data) {
  std::vector<std::array<double, 4>> rows;
  for (const auto& s : data) rows.push_back({s.sub.op, s.sub.rs, s.sub.cc, s.sub.fp});
  return rows;
}

inline std::vector<double> targets_of(const std::vector<Sample>& data) {
  std::vector<double> y;
  for (const auto& s : data) y.push_back(s.target);
  return y;
}

inline oracle::Params to_oracle(const Config& c) {
  oracle::Params p;
  p.k_exit = c.permanence.k_exit;
  p.m_edge_frac = c.permanence.m_edge_frac;
  p.theta_occ = c.permanence.theta_occ;
  p.tau_jump = c.relations.tau_jump;
  p.v_min = c.causality.v_min;
  p.alpha_max = c.causality.alpha_max;
  p.w_cause = c.causality.w_cause;
  p.w_effect = c.causality.w_effect;
  p.p_near_frac = c.causality.p_near_frac;
  p.agents = c.causality.agent_classes;
  p.c_max = c.flicker.c_max;
  p.tau_cut = c.flicker.tau_cut;
  p.static_mode = c.flicker.static_region_mode;
  p.cut_exclusion = c.flicker.cut_exclusion;
  p.dilation = c.flicker.dilation;
  return p;
}

}  // namespace wcs::testing
