#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wcs/error.hpp"

namespace wcs::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

inline double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

/// Sample Pearson correlation. Throws StatsError naming the constant column.
inline double pearson(std::span<const double> x, std::span<const double> y, const std::string& x_name = "x",
                      const std::string& y_name = "y") {
  if (x.size() != y.size()) throw StatsError("pearson: column lengths differ");
  if (x.size() < 2) throw StatsError("pearson: need at least 2 samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw StatsError("correlation undefined: column '" + x_name + "' is constant");
  if (syy <= 0.0) throw StatsError("correlation undefined: column '" + y_name + "' is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks with ties given their average rank.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y, const std::string& x_name = "x",
                       const std::string& y_name = "y") {
  const auto rx = average_ranks(x), ry = average_ranks(y);
  return pearson(rx, ry, x_name, y_name);
}

/// Kendall tau-b.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("kendall: need two equal-length columns, n >= 2");
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ties_x += 1.0;
      } else if (dy == 0.0) {
        ties_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
  if (denom <= 0.0) throw StatsError("kendall: a column is constant");
  return std::clamp((concordant - discordant) / denom, -1.0, 1.0);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Fisher z-transform confidence interval for a Pearson r at 95% (z = 1.959963984540054).
inline Interval fisher_interval(double r, std::size_t n, double z_crit = 1.959963984540054) {
  if (n < 4) throw StatsError("fisher interval: need n >= 4");
  const double rc = std::clamp(r, -0.9999999999999999, 0.9999999999999999);
  const double z = std::atanh(rc);
  const double se = 1.0 / std::sqrt(double(n) - 3.0);
  return {std::tanh(z - z_crit * se), std::tanh(z + z_crit * se)};
}

}  // namespace wcs::stats
