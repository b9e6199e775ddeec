#pragma once

// Scoring pipeline and validation analyses: per-video scoring with
// diagnostics, correlation against human scores, model ranking, pairwise
// preference agreement, deterministic splits and the injection sensitivity
// suite.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wcs/canonical_json.hpp"
#include "wcs/causality.hpp"
#include "wcs/combiner.hpp"
#include "wcs/parallel.hpp"
#include "wcs/config.hpp"
#include "wcs/flicker.hpp"
#include "wcs/interchange.hpp"
#include "wcs/permanence.hpp"
#include "wcs/relations.hpp"
#include "wcs/stats.hpp"
#include "wcs/worldsim.hpp"

namespace wcs {

/// Raised when a bundle lacks frames/flow and no FP override was supplied.
class FlickerUnavailable : public ValidationError {
 public:
  FlickerUnavailable()
      : ValidationError("FP unavailable: bundle has no frames/flow; pass an explicit FP override") {}
};

struct VideoScore {
  std::string video_id;
  SubmetricVector sub;
  double wcs = 0.0;
  bool fp_overridden = false;
  PermanenceReport permanence;
  RelationReport relations;
  CausalReport causality;
  std::optional<FlickerSeries> flicker;
};

inline VideoScore score_bundle(const Bundle& bundle, const Config& cfg, const WeightVector& weights,
                               std::optional<double> fp_override = std::nullopt) {
  VideoScore v;
  v.video_id = bundle.tracks.meta.video_id;
  v.permanence = compute_op(bundle.tracks, cfg.permanence);
  v.relations = compute_rs(bundle.tracks, cfg.relations);
  v.causality = compute_cc(bundle.tracks, cfg.causality);
  v.sub.op = v.permanence.op;
  v.sub.rs = v.relations.rs;
  v.sub.cc = v.causality.cc;
  if (fp_override) {
    if (!std::isfinite(*fp_override) || *fp_override < 0.0 || *fp_override > 1.0)
      throw ValidationError("FP override must be in [0,1]");
    v.sub.fp = *fp_override;
    v.fp_overridden = true;
  } else if (bundle.frames && bundle.flow) {
    v.flicker = compute_fp(*bundle.frames, *bundle.flow, &bundle.tracks, cfg.flicker);
    v.sub.fp = v.flicker->fp;
  } else {
    throw FlickerUnavailable();
  }
  validate(v.sub);
  v.wcs = score(v.sub, weights);
  return v;
}

// ---------------------------------------------------------------------------
// Report serialization

inline json submetrics_json(const SubmetricVector& s) {
  return json{{"op", s.op}, {"rs", s.rs}, {"cc", s.cc}, {"fp", s.fp}};
}

inline json weights_json(const WeightVector& w) {
  return json{{"w_op", w.w_op}, {"w_rs", w.w_rs}, {"w_cc", w.w_cc}, {"w_fp", w.w_fp}, {"b", w.b}};
}

inline json video_report_json(const VideoScore& v, const WeightVector& w, bool scale_100) {
  json j;
  j["schema"] = 1;
  j["video_id"] = v.video_id;
  j["submetrics"] = submetrics_json(v.sub);
  j["weights"] = weights_json(w);
  j["wcs"] = v.wcs;
  if (scale_100) j["wcs_display"] = display_score(v.wcs);

  json perm = json::array();
  for (const auto& o : v.permanence.per_object)
    perm.push_back({{"object_id", o.object_id},
                    {"persistence_ratio", o.persistence_ratio},
                    {"exemption", std::string(to_string(o.exemption))}});
  json rel = json::array();
  for (const auto& e : v.relations.events)
    rel.push_back({{"pair", {e.object_i, e.object_j}},
                   {"frame", e.frame},
                   {"kind", std::string(to_string(e.kind))},
                   {"magnitude", e.magnitude}});
  json ev = json::array();
  for (const auto& e : v.causality.events) {
    json r{{"kind", std::string(to_string(e.kind))},
           {"object_id", e.object_id},
           {"frame", e.frame},
           {"explained", e.explained},
           {"violation", std::string(to_string(e.violation))}};
    if (e.partner_id) r["partner_id"] = *e.partner_id;
    ev.push_back(r);
  }
  json diag;
  diag["permanence"] = {{"objects", perm}};
  diag["relations"] = {{"pairs", v.relations.pairs}, {"events", rel}};
  diag["causality"] = {{"n_events", v.causality.n_events},
                       {"n_violations", v.causality.violations.size()},
                       {"events", ev},
                       {"motion_energy", v.causality.motion_energy}};
  if (v.flicker) {
    std::vector<int> cuts(v.flicker->cut_flags.begin(), v.flicker->cut_flags.end());
    std::vector<int> degenerate(v.flicker->degenerate_flags.begin(), v.flicker->degenerate_flags.end());
    diag["flicker"] = {{"residuals", v.flicker->residuals},
                       {"raw_residuals", v.flicker->raw_residuals},
                       {"mask_coverage", v.flicker->mask_coverage},
                       {"cut_flags", cuts},
                       {"degenerate_flags", degenerate}};
  } else {
    diag["flicker"] = {{"overridden", v.fp_overridden}};
  }
  j["diagnostics"] = diag;
  return j;
}

// ---------------------------------------------------------------------------
// Splits

/// FNV-1a over the seed bytes then the id.
inline std::uint64_t split_hash(const std::string& video_id, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((seed >> (8 * i)) & 0xFF));
  for (char c : video_id) mix(static_cast<unsigned char>(c));
  return h;
}

inline bool in_training_split(const std::string& video_id, const HarnessParams& p) {
  const double u = double(split_hash(video_id, p.split_seed) % 1000000ull) / 1000000.0;
  return u < p.train_fraction;
}

// ---------------------------------------------------------------------------
// Correlation

struct ScoredVideo {
  std::string video_id;
  std::string model_label;
  double wcs = 0.0;
  std::optional<double> human;
  std::vector<double> extras;  // external metric columns
};

struct CorrelationReport {
  std::size_t n = 0;
  double pearson = 0.0;
  double spearman = 0.0;
  stats::Interval pearson_ci;
  bool has_ci = false;
  std::map<std::string, std::pair<double, double>> extra;  // column -> (pearson, spearman)
  std::map<std::string, std::pair<double, double>> model_means;  // label -> (wcs, human)
  std::optional<double> model_kendall;
};

inline CorrelationReport correlate(std::vector<ScoredVideo> videos, const std::vector<std::string>& extra_columns = {},
                                   const std::string& aggregation = "mean") {
  std::erase_if(videos, [](const ScoredVideo& v) { return !v.human.has_value(); });
  std::sort(videos.begin(), videos.end(), [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  if (videos.size() < 3) throw StatsError("correlate: need n >= 3 videos with human scores");
  CorrelationReport rep;
  rep.n = videos.size();
  std::vector<double> w, h;
  for (const auto& v : videos) {
    w.push_back(v.wcs);
    h.push_back(*v.human);
  }
  rep.pearson = stats::pearson(w, h, "wcs", "human_score");
  rep.spearman = stats::spearman(w, h, "wcs", "human_score");
  if (rep.n >= 4) {
    rep.pearson_ci = stats::fisher_interval(rep.pearson, rep.n);
    rep.has_ci = true;
  }
  for (std::size_t c = 0; c < extra_columns.size(); ++c) {
    std::vector<double> x;
    for (const auto& v : videos) x.push_back(v.extras.at(c));
    rep.extra[extra_columns[c]] = {stats::pearson(x, h, extra_columns[c], "human_score"),
                                   stats::spearman(x, h, extra_columns[c], "human_score")};
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_model;
  for (const auto& v : videos)
    if (!v.model_label.empty()) {
      by_model[v.model_label].first.push_back(v.wcs);
      by_model[v.model_label].second.push_back(*v.human);
    }
  auto agg = [&](const std::vector<double>& x) { return aggregation == "median" ? stats::median(x) : stats::mean(x); };
  std::vector<double> mw, mh;
  for (const auto& [label, cols] : by_model) {
    rep.model_means[label] = {agg(cols.first), agg(cols.second)};
    mw.push_back(rep.model_means[label].first);
    mh.push_back(rep.model_means[label].second);
  }
  if (mw.size() >= 3) {
    try {
      rep.model_kendall = stats::kendall_tau(mw, mh);
    } catch (const StatsError&) {
      rep.model_kendall.reset();
    }
  }
  return rep;
}

inline json correlation_json(const CorrelationReport& r) {
  json j;
  j["schema"] = 1;
  j["n"] = r.n;
  j["pearson"] = r.pearson;
  j["spearman"] = r.spearman;
  if (r.has_ci) j["pearson_ci95"] = {r.pearson_ci.lo, r.pearson_ci.hi};
  json extra = json::object();
  for (const auto& [name, pr] : r.extra) extra[name] = {{"pearson", pr.first}, {"spearman", pr.second}};
  j["external_metrics"] = extra;
  json models = json::object();
  for (const auto& [label, m] : r.model_means) models[label] = {{"wcs", m.first}, {"human", m.second}};
  j["models"] = models;
  if (r.model_kendall) j["model_rank_kendall_tau"] = *r.model_kendall;
  return j;
}

// ---------------------------------------------------------------------------
// Pairwise agreement

struct PreferencePair {
  double wcs_preferred = 0.0;  // the video humans (or the oracle) prefer
  double wcs_other = 0.0;
};

/// Fraction of pairs where the preferred video scores strictly higher; ties count 0.5.
inline double pairwise_agreement(const std::vector<PreferencePair>& pairs) {
  if (pairs.empty()) throw StatsError("pairwise_agreement: need at least one pair");
  double agree = 0.0;
  for (const auto& p : pairs) {
    if (p.wcs_preferred > p.wcs_other) agree += 1.0;
    else if (p.wcs_preferred == p.wcs_other) agree += 0.5;
  }
  return agree / double(pairs.size());
}

// ---------------------------------------------------------------------------
// Sensitivity

struct SensitivityRow {
  std::string name;
  bool applied = true;
  std::string skip_reason;
  SubmetricVector clean;
  SubmetricVector injected;
  double wcs_clean = 0.0;
  double wcs_injected = 0.0;

  double d_op() const { return injected.op - clean.op; }
  double d_rs() const { return injected.rs - clean.rs; }
  double d_cc() const { return injected.cc - clean.cc; }
  double d_fp() const { return injected.fp - clean.fp; }
  double d_wcs() const { return wcs_injected - wcs_clean; }
};

inline std::vector<SensitivityRow> sensitivity_suite(const Bundle& clean, const std::vector<sim::NamedInjection>& injections,
                                                     const Config& cfg, const WeightVector& weights, std::size_t jobs = 1) {
  const VideoScore base = score_bundle(clean, cfg, weights);
  return parallel_map(injections.size(), jobs, [&](std::size_t k) {
    SensitivityRow row;
    row.name = injections[k].name;
    row.clean = base.sub;
    row.wcs_clean = base.wcs;
    try {
      const Bundle corrupted = sim::inject(clean, injections[k].injection);
      const VideoScore v = score_bundle(corrupted, cfg, weights);
      row.injected = v.sub;
      row.wcs_injected = v.wcs;
    } catch (const ScriptError& e) {
      row.applied = false;
      row.skip_reason = e.what();
      row.injected = row.clean;
      row.wcs_injected = row.wcs_clean;
    }
    return row;
  });
}

inline json sensitivity_json(const std::vector<SensitivityRow>& rows) {
  json j;
  j["schema"] = 1;
  json arr = json::array();
  for (const auto& r : rows) {
    json e{{"injection", r.name}, {"applied", r.applied}};
    if (!r.applied) e["skip_reason"] = r.skip_reason;
    e["delta"] = {{"op", r.d_op()}, {"rs", r.d_rs()}, {"cc", r.d_cc()}, {"fp", r.d_fp()}, {"wcs", r.d_wcs()}};
    e["clean"] = submetrics_json(r.clean);
    e["injected"] = submetrics_json(r.injected);
    e["wcs_clean"] = r.wcs_clean;
    e["wcs_injected"] = r.wcs_injected;
    arr.push_back(e);
  }
  j["rows"] = arr;
  return j;
}

inline std::string sensitivity_table(const std::vector<SensitivityRow>& rows) {
  std::string out = "injection                 dOP        dRS        dCC        dFP        dWCS\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %+10.4f %+10.4f %+10.4f %+10.4f %+10.4f%s\n", r.name.c_str(), r.d_op(),
                  r.d_rs(), r.d_cc(), r.d_fp(), r.d_wcs(), r.applied ? "" : "  (skipped)");
    out += buf;
  }
  return out;
}

}  // namespace wcs
