#pragma once

// Exhaustive active-set reference for the weight fit: every subset of the
// four signed features is solved by plain normal equations with a free
// intercept, and the best feasible subset wins.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct EnumFit {
  std::array<double, 4> w{};
  double b = 0;
  double sse = std::numeric_limits<double>::infinity();
};

/// Gaussian elimination with partial pivoting on a dense square system.
/// Returns false when a pivot vanishes.
inline bool solve_dense(std::vector<std::vector<double>> M, std::vector<double> r, std::vector<double>& out) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t k = c + 1; k < n; ++k)
      if (std::fabs(M[k][c]) > std::fabs(M[piv][c])) piv = k;
    if (std::fabs(M[piv][c]) < 1e-14) return false;
    std::swap(M[c], M[piv]);
    std::swap(r[c], r[piv]);
    for (std::size_t k = c + 1; k < n; ++k) {
      const double f = M[k][c] / M[c][c];
      for (std::size_t m = c; m < n; ++m) M[k][m] -= f * M[c][m];
      r[k] -= f * r[c];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = r[c];
    for (std::size_t m = c + 1; m < n; ++m) s -= M[c][m] * out[m];
    out[c] = s / M[c][c];
  }
  return true;
}

/// rows: (op, rs, cc, fp) per sample; features enter as (op, rs, cc, -fp).
inline EnumFit enumerate_fit(const std::vector<std::array<double, 4>>& rows, const std::vector<double>& y) {
  EnumFit best;
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < 4; ++j)
      if (mask & (1 << j)) cols.push_back(j);
    const std::size_t p = cols.size() + 1;  // + intercept
    auto feature = [&](std::size_t k, std::size_t c) {
      if (c == cols.size()) return 1.0;
      const int j = cols[c];
      return j == 3 ? -rows[k][3] : rows[k][std::size_t(j)];
    };
    std::vector<std::vector<double>> M(p, std::vector<double>(p, 0.0));
    std::vector<double> r(p, 0.0), sol;
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t a = 0; a < p; ++a) {
        r[a] += feature(k, a) * y[k];
        for (std::size_t c = 0; c < p; ++c) M[a][c] += feature(k, a) * feature(k, c);
      }
    if (!solve_dense(M, r, sol)) continue;
    bool feasible = true;
    for (std::size_t c = 0; c + 1 < p; ++c) feasible = feasible && sol[c] >= -1e-12;
    if (!feasible) continue;
    double sse = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double pred = 0;
      for (std::size_t c = 0; c < p; ++c) pred += feature(k, c) * sol[c];
      sse += (y[k] - pred) * (y[k] - pred);
    }
    if (sse < best.sse - 1e-15) {
      best = EnumFit{};
      best.sse = sse;
      for (std::size_t c = 0; c + 1 < p; ++c) best.w[std::size_t(cols[c])] = std::max(0.0, sol[c]);
      best.b = sol[p - 1];
    }
  }
  return best;
}

/// Ordinary least squares on all four features plus intercept: (w_op, w_rs, w_cc, w_fp, b).
inline std::vector<double> unconstrained_fit(const std::vector<std::array<double, 4>>& rows, const std::vector<double>& y) {
  std::vector<std::vector<double>> M(5, std::vector<double>(5, 0.0));
  std::vector<double> r(5, 0.0), sol;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double f[5] = {rows[k][0], rows[k][1], rows[k][2], -rows[k][3], 1.0};
    for (int a = 0; a < 5; ++a) {
      r[a] += f[a] * y[k];
      for (int c = 0; c < 5; ++c) M[a][c] += f[a] * f[c];
    }
  }
  if (!solve_dense(M, r, sol)) sol.clear();
  return sol;
}

}  // namespace oracle
