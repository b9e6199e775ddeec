#pragma once

// The `wcs` command line. run() is callable in-process so tests can drive
// every subcommand without spawning a shell.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wcs/wcs.hpp"

namespace wcs::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kNumericFailure = 3 };

struct Common {
  std::string config_path;
  std::vector<std::string> settings;
  std::size_t jobs = 1;
};

inline Config resolve_config(const Common& c) {
  Config cfg;
  if (!c.config_path.empty()) cfg = load_config(c.config_path);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

inline WeightVector resolve_weights(const std::string& path) {
  return path.empty() ? WeightVector::equal() : read_weights(path);
}

inline void add_common(CLI::App* sub, Common& c) {
  const char* env = std::getenv("WCS_CONFIG");
  if (env != nullptr) c.config_path = env;
  sub->add_option("-c,--config", c.config_path, "INI config file (default: $WCS_CONFIG)");
  sub->add_option("--set", c.settings, "Override a config key, e.g. --set causality.v_min=0.8 (repeatable)");
  sub->add_option("-j,--jobs", c.jobs, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  sub->footer("Config keys (section.key = default):\n" + describe_config_keys());
}

inline fs::path resolve_relative(const fs::path& base_file, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_file.parent_path() / path;
}

/// Joins features with human scores by video_id, ordered by video_id.
inline std::vector<std::pair<std::string, Sample>> load_samples(const std::string& features, const std::string& scores) {
  auto feats = parse_features_csv(detail::read_file(features), features);
  auto human = parse_scores_csv(detail::read_file(scores), scores);
  std::map<std::string, double> by_id;
  for (const auto& h : human) by_id[h.video_id] = h.score;
  std::vector<std::pair<std::string, Sample>> out;
  for (const auto& f : feats) {
    auto it = by_id.find(f.video_id);
    if (it == by_id.end()) throw ValidationError("no human score for video '" + f.video_id + "' in " + scores);
    out.push_back({f.video_id, Sample{f.sub, it->second}});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

inline json fit_json(const FitResult& f) {
  json j = weights_to_json(f.weights, &f);
  j["rmse"] = f.rmse;
  j["kkt_residual"] = f.kkt_residual;
  j["multipliers"] = f.multipliers;
  return j;
}

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"World Consistency Score: score, fit and validate generated videos", "wcs"};
  app.require_subcommand(1);
  app.footer("Config keys (section.key = default):\n" + describe_config_keys());

  Common common;
  std::string output, weights_path, table_path, features_path, scores_path, manifest_path, scene_path;
  std::string bundle_path;
  std::vector<std::string> bundles, injection_specs;
  std::optional<double> fp_override;
  bool scale_100 = false, standardize = false, use_split = false, standard = false;
  std::optional<std::uint64_t> random_seed;

  auto* score_cmd = app.add_subcommand("score", "Score one or more bundles");
  score_cmd->add_option("bundles", bundles, "Bundle directories")->required();
  score_cmd->add_option("-w,--weights", weights_path, "Weight file (default: equal weights, b = 0)");
  score_cmd->add_option("--fp-override", fp_override, "Use this FP instead of computing it from frames/flow");
  score_cmd->add_flag("--scale-100", scale_100, "Also report the 0-100 display score");
  score_cmd->add_option("--features", features_path, "Also write a video_id,op,rs,cc,fp CSV");
  score_cmd->add_option("-o,--output", output, "Report path")->required();
  add_common(score_cmd, common);

  auto* fit_cmd = app.add_subcommand("fit", "Fit non-negative weights to human scores");
  fit_cmd->add_option("--features", features_path, "Submetric CSV")->required();
  fit_cmd->add_option("--scores", scores_path, "Human score CSV")->required();
  fit_cmd->add_flag("--standardize", standardize, "Standardize features before fitting");
  fit_cmd->add_flag("--split", use_split, "Fit on the training split and report validation r");
  fit_cmd->add_option("--report", table_path, "Also write a fit report");
  fit_cmd->add_option("-o,--output", output, "Weight file path")->required();
  add_common(fit_cmd, common);

  auto* corr_cmd = app.add_subcommand("correlate", "Correlate WCS with human scores over a manifest");
  corr_cmd->add_option("--manifest", manifest_path, "Dataset manifest CSV")->required();
  corr_cmd->add_option("-w,--weights", weights_path, "Weight file (default: equal weights)");
  corr_cmd->add_option("-o,--output", output, "Report path")->required();
  add_common(corr_cmd, common);

  auto* abl_cmd = app.add_subcommand("ablate", "Refit with each submetric removed");
  abl_cmd->add_option("--features", features_path, "Submetric CSV")->required();
  abl_cmd->add_option("--scores", scores_path, "Human score CSV")->required();
  abl_cmd->add_flag("--standardize", standardize, "Standardize features before fitting");
  abl_cmd->add_option("-o,--output", output, "Report path")->required();
  add_common(abl_cmd, common);

  auto* sens_cmd = app.add_subcommand("sensitivity", "Score clean vs artifact-injected copies of a bundle");
  auto* sens_src = sens_cmd->add_option("--bundle", bundle_path, "Simulator bundle directory");
  sens_cmd->add_flag("--standard", standard, "Use the built-in standard scene")->excludes(sens_src);
  sens_cmd->add_option("--injection", injection_specs,
                       "Injection, e.g. \"teleport object=2 frame=12 dx=-36\" (default: the standard set)");
  sens_cmd->add_option("-w,--weights", weights_path, "Weight file (default: equal weights)");
  sens_cmd->add_option("--table", table_path, "Also write a plain-text table");
  sens_cmd->add_option("-o,--output", output, "Report path")->required();
  add_common(sens_cmd, common);

  auto* sim_cmd = app.add_subcommand("simulate", "Render a scene script to a bundle");
  auto* sim_scene = sim_cmd->add_option("--scene", scene_path, "Scene script");
  auto* sim_std = sim_cmd->add_flag("--standard", standard, "Use the built-in standard scene");
  auto* sim_rand = sim_cmd->add_option("--random-seed", random_seed, "Generate a randomized scene");
  sim_scene->excludes(sim_std)->excludes(sim_rand);
  sim_std->excludes(sim_rand);
  sim_cmd->add_option("-o,--output", output, "Bundle directory")->required();
  add_common(sim_cmd, common);

  auto* inj_cmd = app.add_subcommand("inject", "Apply artifact injections to a simulator bundle");
  inj_cmd->add_option("--bundle", bundle_path, "Simulator bundle directory")->required();
  inj_cmd->add_option("--injection", injection_specs, "Injection spec (repeatable)")->required();
  inj_cmd->add_option("-o,--output", output, "Bundle directory")->required();
  add_common(inj_cmd, common);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  auto parse_injections = [&] {
    std::vector<sim::NamedInjection> v;
    for (const auto& spec : injection_specs) {
      auto inj = sim::parse_injection(spec, "--injection");
      v.push_back({std::string(sim::to_string(inj.kind)), inj});
    }
    return v;
  };

  try {
    const Config cfg = resolve_config(common);

    if (*score_cmd) {
      const WeightVector w = resolve_weights(weights_path);
      auto scored = parallel_map(bundles.size(), common.jobs, [&](std::size_t i) {
        return score_bundle(read_bundle(bundles[i]), cfg, w, fp_override);
      });
      std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
      json report;
      if (scored.size() == 1) {
        report = video_report_json(scored[0], w, scale_100);
      } else {
        report["schema"] = 1;
        report["videos"] = json::array();
        for (const auto& v : scored) {
          json one = video_report_json(v, w, scale_100);
          one.erase("schema");
          report["videos"].push_back(one);
        }
      }
      if (!features_path.empty()) {
        std::vector<FeatureRow> rows;
        for (const auto& v : scored) rows.push_back({v.video_id, v.sub});
        detail::write_file_atomic(features_path, serialize_features_csv(rows));
      }
      write_report(report, output);
      for (const auto& v : scored) {
        out << v.video_id << " wcs=" << format_fixed17(v.wcs);
        if (scale_100) out << " display=" << format_fixed17(display_score(v.wcs));
        out << "\n";
      }
    } else if (*fit_cmd) {
      const auto rows = load_samples(features_path, scores_path);
      std::vector<Sample> train, validation;
      for (const auto& [id, s] : rows) {
        if (!use_split || in_training_split(id, cfg.harness)) train.push_back(s);
        else validation.push_back(s);
      }
      FitOptions opts;
      opts.standardize = standardize || cfg.combiner.standardize;
      const FitResult fit = fit_weights(train, opts);
      if (!table_path.empty()) {
        json rep = fit_json(fit);
        rep["n_train"] = train.size();
        rep["n_validation"] = validation.size();
        if (validation.size() >= 3) rep["validation_r"] = validation_r(validation, fit.weights);
        write_report(rep, table_path);
      }
      write_weights(fit.weights, output, &fit);
      out << "fit on " << train.size() << " videos, rmse=" << format_fixed17(fit.rmse) << "\n";
    } else if (*corr_cmd) {
      const WeightVector w = resolve_weights(weights_path);
      const Manifest m = parse_manifest_csv(detail::read_file(manifest_path), manifest_path);
      auto scored = parallel_map(m.rows.size(), common.jobs, [&](std::size_t i) {
        const auto& row = m.rows[i];
        Bundle b = read_bundle(resolve_relative(manifest_path, row.bundle_path));
        VideoScore v = score_bundle(b, cfg, w);
        return ScoredVideo{row.video_id, row.model_label, v.wcs, row.human_score, row.extras};
      });
      const auto rep = correlate(scored, m.extra_columns, cfg.harness.aggregation);
      json j = correlation_json(rep);
      j["weights"] = weights_json(w);
      write_report(j, output);
      out << "n=" << rep.n << " pearson=" << format_fixed17(rep.pearson) << " spearman=" << format_fixed17(rep.spearman)
          << "\n";
    } else if (*abl_cmd) {
      const auto rows = load_samples(features_path, scores_path);
      std::vector<Sample> train, validation;
      for (const auto& [id, s] : rows) (in_training_split(id, cfg.harness) ? train : validation).push_back(s);
      FitOptions opts;
      opts.standardize = standardize || cfg.combiner.standardize;
      const auto table = ablate(train, validation, opts);
      json j;
      j["schema"] = 1;
      j["n_train"] = train.size();
      j["n_validation"] = validation.size();
      j["rows"] = json::array();
      for (const auto& r : table)
        j["rows"].push_back({{"label", r.label},
                             {"weights", weights_json(r.fit.weights)},
                             {"train_rmse", r.train_rmse},
                             {"validation_r", r.validation_r}});
      write_report(j, output);
      for (const auto& r : table)
        out << r.label << " train_rmse=" << format_fixed17(r.train_rmse)
            << " validation_r=" << format_fixed17(r.validation_r) << "\n";
    } else if (*sens_cmd) {
      if (bundle_path.empty() && !standard) throw ValidationError("sensitivity: pass --bundle or --standard");
      const WeightVector w = resolve_weights(weights_path);
      const Bundle clean = standard ? sim::simulate(sim::standard_scene()) : read_bundle(bundle_path);
      const auto injections = injection_specs.empty() ? sim::standard_injections() : parse_injections();
      const auto rows = sensitivity_suite(clean, injections, cfg, w, common.jobs);
      json j = sensitivity_json(rows);
      j["weights"] = weights_json(w);
      j["video_id"] = clean.tracks.meta.video_id;
      const std::string table = sensitivity_table(rows);
      if (!table_path.empty()) detail::write_file_atomic(table_path, table);
      write_report(j, output);
      out << table;
    } else if (*sim_cmd) {
      sim::SceneScript script;
      if (!scene_path.empty()) script = sim::parse_scene(detail::read_file(scene_path), scene_path);
      else if (random_seed) script = sim::random_scene(*random_seed);
      else if (standard) script = sim::standard_scene();
      else throw ValidationError("simulate: pass --scene, --standard or --random-seed");
      write_bundle(sim::simulate(script), output);
      out << "wrote " << output << "\n";
    } else if (*inj_cmd) {
      std::vector<sim::Injection> v;
      for (const auto& n : parse_injections()) v.push_back(n.injection);
      write_bundle(sim::inject(read_bundle(bundle_path), v), output);
      out << "wrote " << output << "\n";
    }
  } catch (const FitError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const StatsError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kOk;
}

}  // namespace wcs::cli
