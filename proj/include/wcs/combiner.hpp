#pragma once

// World consistency score: a non-negative weighted combination of the four
// submetrics plus a free bias, with weights learned from human scores by
// bias-augmented non-negative least squares.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcs/canonical_json.hpp"
#include "wcs/error.hpp"
#include "wcs/stats.hpp"
#include "wcs/types.hpp"

namespace wcs {

inline constexpr std::array<const char*, 4> kFeatureNames = {"op", "rs", "cc", "fp"};

/// wcs = w_op*op + w_rs*rs + w_cc*cc - w_fp*fp + b
inline double score(const SubmetricVector& s, const WeightVector& w) {
  validate(w);
  return w.w_op * s.op + w.w_rs * s.rs + w.w_cc * s.cc - w.w_fp * s.fp + w.b;
}

/// Presentation-only 0-100 scale.
inline double display_score(double wcs) { return std::clamp(100.0 * wcs, 0.0, 100.0); }

struct Sample {
  SubmetricVector sub;
  double target = 0.0;
};

struct FitOptions {
  bool standardize = false;
  /// Features whose weight is pinned to zero (ablation).
  std::array<bool, 4> fixed_zero{};
};

struct FitResult {
  WeightVector weights;
  double rmse = 0.0;
  double kkt_residual = 0.0;
  /// Lagrange multipliers of the w >= 0 constraints (raw feature scale).
  std::array<double, 4> multipliers{};
  bool standardized = false;
  std::array<double, 4> feature_mean{};
  std::array<double, 4> feature_scale{1.0, 1.0, 1.0, 1.0};
};

namespace detail {

/// Feature vector with the penalty sign folded in, so every weight is >= 0.
inline std::array<double, 4> signed_features(const SubmetricVector& s) { return {s.op, s.rs, s.cc, -s.fp}; }

inline Eigen::VectorXd solve_subset(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<int>& cols) {
  Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
  return sub.colPivHouseholderQr().solve(y);
}

}  // namespace detail

/// Lawson-Hanson active-set NNLS: min ||A x - y||^2 subject to x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, int max_outer = 0) {
  const auto n = A.cols();
  if (max_outer <= 0) max_outer = 3 * static_cast<int>(n) + 10;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-13 * std::max(1.0, (A.transpose() * y).cwiseAbs().maxCoeff());

  auto passive_cols = [&] {
    std::vector<int> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[std::size_t(j)]) cols.push_back(static_cast<int>(j));
    return cols;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd grad = A.transpose() * (y - A * x);
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[std::size_t(j)] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[std::size_t(best)] = true;

    for (int inner = 0; inner < 4 * static_cast<int>(n) + 10; ++inner) {
      const auto cols = passive_cols();
      const Eigen::VectorXd z_sub = detail::solve_subset(A, y, cols);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = z_sub(static_cast<Eigen::Index>(k));

      bool feasible = true;
      for (int c : cols) feasible = feasible && z(c) > 0.0;
      if (feasible) {
        x = z;
        break;
      }
      // Step toward z until the first passive variable hits zero.
      double alpha = 1.0;
      for (int c : cols)
        if (z(c) <= 0.0) alpha = std::min(alpha, x(c) / (x(c) - z(c)));
      x += alpha * (z - x);
      for (int c : cols) {
        if (x(c) <= 1e-15) {
          x(c) = 0.0;
          passive[std::size_t(c)] = false;
        }
      }
      if (passive_cols().empty()) break;
    }
  }
  return x;
}

/// Fits (w, b) to minimize sum_k (H_k - wcs_k)^2 with w >= 0 and b free.
/// The bias is eliminated by centering; constant feature columns are dropped
/// (their weight is 0 and their level is absorbed by b).
inline FitResult fit_weights(const std::vector<Sample>& data, const FitOptions& options = {}) {
  if (data.size() < 5) throw FitError("fit_weights: need at least 5 samples, got " + std::to_string(data.size()));
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto f = detail::signed_features(data[std::size_t(k)].sub);
    for (int j = 0; j < 4; ++j) X(k, j) = f[std::size_t(j)];
    y(k) = data[std::size_t(k)].target;
    if (!std::isfinite(y(k))) throw FitError("fit_weights: non-finite target");
  }

  FitResult res;
  res.standardized = options.standardize;
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd Xc = X.rowwise() - mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  std::vector<int> active;
  bool all_constant = true;
  for (int j = 0; j < 4; ++j) {
    res.feature_mean[std::size_t(j)] = mean(j);
    const double spread = Xc.col(j).cwiseAbs().maxCoeff();
    const bool constant = spread <= 1e-12 * (1.0 + std::abs(mean(j)));
    all_constant = all_constant && constant;
    double scale = 1.0;
    if (!constant && options.standardize) scale = std::sqrt(Xc.col(j).squaredNorm() / double(n - 1));
    res.feature_scale[std::size_t(j)] = scale;
    if (!constant && !options.fixed_zero[std::size_t(j)]) active.push_back(j);
  }
  if (all_constant) throw FitError("fit_weights: every submetric column is constant");

  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k)
    A.col(static_cast<Eigen::Index>(k)) = Xc.col(active[k]) / res.feature_scale[std::size_t(active[k])];

  if (!active.empty()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < A.cols()) {
      std::string names;
      for (std::size_t k = 0; k < active.size(); ++k) {
        Eigen::MatrixXd rest(n, A.cols() - 1);
        Eigen::Index c = 0;
        for (Eigen::Index m = 0; m < A.cols(); ++m)
          if (m != Eigen::Index(k)) rest.col(c++) = A.col(m);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q2(rest);
        q2.setThreshold(1e-10);
        if (q2.rank() == qr.rank()) names += (names.empty() ? "" : ", ") + std::string(kFeatureNames[std::size_t(active[k])]);
      }
      throw FitError("fit_weights: degenerate design, collinear columns: " + names);
    }
  }

  std::array<double, 4> w{};
  if (!active.empty()) {
    const Eigen::VectorXd x = nnls(A, yc);
    for (std::size_t k = 0; k < active.size(); ++k)
      w[std::size_t(active[k])] = x(static_cast<Eigen::Index>(k)) / res.feature_scale[std::size_t(active[k])];
  }
  double b = y_mean;
  for (int j = 0; j < 4; ++j) b -= w[std::size_t(j)] * mean(j);
  res.weights = {w[0], w[1], w[2], w[3], b};

  // KKT on the raw (uncentered) problem with the bias folded in, per sample.
  Eigen::VectorXd wv(4);
  for (int j = 0; j < 4; ++j) wv(j) = w[std::size_t(j)];
  const Eigen::VectorXd resid = y - (X * wv).array().matrix() - Eigen::VectorXd::Constant(n, b);
  const Eigen::VectorXd grad = X.transpose() * resid / double(n);
  double kkt = std::abs(resid.mean());
  for (int j = 0; j < 4; ++j) {
    if (options.fixed_zero[std::size_t(j)]) continue;
    if (w[std::size_t(j)] > 0.0) {
      kkt = std::max(kkt, std::abs(grad(j)));
    } else {
      kkt = std::max(kkt, std::max(0.0, grad(j)));
      res.multipliers[std::size_t(j)] = std::max(0.0, -grad(j));
    }
  }
  res.kkt_residual = kkt;
  res.rmse = std::sqrt(resid.squaredNorm() / double(n));
  if (!(kkt < 1e-9)) throw FitError("fit_weights: KKT residual " + format_fixed17(kkt) + " above 1e-9");
  return res;
}

inline std::vector<double> predict(const std::vector<Sample>& data, const WeightVector& w) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(score(s.sub, w));
  return out;
}

inline double rmse(const std::vector<Sample>& data, const WeightVector& w) {
  if (data.empty()) return 0.0;
  double ss = 0.0;
  for (const auto& s : data) {
    const double e = s.target - score(s.sub, w);
    ss += e * e;
  }
  return std::sqrt(ss / double(data.size()));
}

/// Pearson r of predictions against targets; a constant prediction
/// (e.g. all weights zero) carries no ranking information and scores 0.
inline double validation_r(const std::vector<Sample>& data, const WeightVector& w) {
  std::vector<double> pred = predict(data, w), target;
  for (const auto& s : data) target.push_back(s.target);
  if (data.size() < 2) return 0.0;
  const double lo = *std::min_element(pred.begin(), pred.end());
  const double hi = *std::max_element(pred.begin(), pred.end());
  if (hi - lo <= 0.0) return 0.0;
  return stats::pearson(pred, target, "wcs", "human_score");
}

struct AblationRow {
  std::string label;  // "full", "drop_op", ...
  FitResult fit;
  double train_rmse = 0.0;
  double validation_r = 0.0;
};

/// Full fit followed by one refit per submetric with that weight pinned to 0.
inline std::vector<AblationRow> ablate(const std::vector<Sample>& train, const std::vector<Sample>& validation,
                                       const FitOptions& options = {}) {
  std::vector<AblationRow> rows;
  auto run = [&](const std::string& label, const FitOptions& o) {
    AblationRow r{label, fit_weights(train, o), 0.0, 0.0};
    r.train_rmse = r.fit.rmse;
    r.validation_r = validation_r(validation, r.fit.weights);
    rows.push_back(std::move(r));
  };
  run("full", options);
  for (std::size_t j = 0; j < 4; ++j) {
    FitOptions o = options;
    o.fixed_zero[j] = true;
    run(std::string("drop_") + kFeatureNames[j], o);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Weight files

inline json weights_to_json(const WeightVector& w, const FitResult* fit = nullptr) {
  json j;
  j["schema"] = 1;
  j["w_op"] = w.w_op;
  j["w_rs"] = w.w_rs;
  j["w_cc"] = w.w_cc;
  j["w_fp"] = w.w_fp;
  j["b"] = w.b;
  json st;
  st["enabled"] = fit != nullptr && fit->standardized;
  st["mean"] = json::array();
  st["scale"] = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    st["mean"].push_back(fit ? fit->feature_mean[k] : 0.0);
    st["scale"].push_back(fit ? fit->feature_scale[k] : 1.0);
  }
  j["standardization"] = st;
  return j;
}

inline WeightVector weights_from_json(const json& j, const std::string& file = "weights.json") {
  WeightVector w;
  try {
    w.w_op = j.at("w_op").get<double>();
    w.w_rs = j.at("w_rs").get<double>();
    w.w_cc = j.at("w_cc").get<double>();
    w.w_fp = j.at("w_fp").get<double>();
    w.b = j.at("b").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(file, 0, std::string("weight file: ") + e.what());
  }
  validate(w);
  return w;
}

inline void write_weights(const WeightVector& w, const std::filesystem::path& path, const FitResult* fit = nullptr) {
  validate(w);
  write_report(weights_to_json(w, fit), path);
}

inline WeightVector read_weights(const std::filesystem::path& path) {
  return weights_from_json(read_report(path), path.string());
}

}  // namespace wcs
