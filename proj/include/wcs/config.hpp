#pragma once

// Sectioned key-value configuration ("[section]" headers, "key = value"
// lines, '#' or ';' comments) plus the parameter structs of every module.

#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wcs/error.hpp"
#include "wcs/interchange.hpp"

namespace wcs {

struct IniEntry {
  std::string key;
  std::string value;
  std::size_t offset = 0;
};

struct IniSection {
  std::string name;
  std::vector<IniEntry> entries;
  std::size_t offset = 0;

  const IniEntry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

/// Sections in file order; section names may repeat.
struct IniFile {
  std::string file;
  std::vector<IniSection> sections;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline IniFile parse_ini(std::string_view text, const std::string& file) {
  IniFile ini;
  ini.file = file;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    pos = end + 1;
    std::string_view line = text.substr(start, end - start);
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(file, start, "unterminated section header");
      ini.sections.push_back({std::string(detail::trim(line.substr(1, line.size() - 2))), {}, start});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(file, start, "expected 'key = value'");
    if (ini.sections.empty()) throw ParseError(file, start, "key outside of any [section]");
    std::string key(detail::trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(file, start, "empty key");
    ini.sections.back().entries.push_back({std::move(key), std::string(detail::trim(line.substr(eq + 1))), start});
  }
  return ini;
}

// ---------------------------------------------------------------------------
// Module parameters

struct PermanenceParams {
  int k_exit = 3;
  double m_edge_frac = 0.03;
  double theta_occ = 0.9;

  /// Margin band width in pixels for a video of the given size.
  double edge_margin(std::size_t height, std::size_t width) const {
    return std::max(2.0, m_edge_frac * double(std::min(height, width)));
  }
};

struct RelationParams {
  double tau_jump = 1.0;
};

struct CausalityParams {
  double v_min = 0.5;
  double alpha_max = 0.5;
  int w_cause = 3;
  int w_effect = 5;
  double p_near_frac = 0.1;
  std::vector<std::string> agent_classes = {"person", "animal"};
};

struct FlickerParams {
  double c_max = 0.5;
  double tau_cut = 0.6;
  bool static_region_mode = true;
  bool cut_exclusion = false;
  double dilation = 2.0;
};

struct CombinerParams {
  bool standardize = false;
};

struct HarnessParams {
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  std::string aggregation = "mean";
};

struct Config {
  PermanenceParams permanence;
  RelationParams relations;
  CausalityParams causality;
  FlickerParams flicker;
  CombinerParams combiner;
  HarnessParams harness;
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  auto d = parse_number<double>(v);
  if (!d || !std::isfinite(*d)) throw ValidationError("config " + key + ": expected a number, got '" + v + "'");
  return *d;
}
inline long long to_int(const std::string& key, const std::string& v) {
  auto d = parse_number<long long>(v);
  if (!d) throw ValidationError("config " + key + ": expected an integer, got '" + v + "'");
  return *d;
}
inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ValidationError("config " + key + ": expected a boolean, got '" + v + "'");
}
inline void require(bool ok, const std::string& key, const char* bound) {
  if (!ok) throw ValidationError("config " + key + " out of bounds: requires " + bound);
}
inline std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + v[i];
  return out;
}

}  // namespace detail

/// One configuration key: dotted name, current default rendered as text,
/// a short description, and a validating setter.
struct ConfigKey {
  std::string name;
  std::string description;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  using namespace detail;
  static const std::vector<ConfigKey> keys = {
      {"permanence.k_exit", "visible frames inspected for a boundary exit (>= 2)",
       [](const Config& c) { return std::to_string(c.permanence.k_exit); },
       [](Config& c, const std::string& v) {
         auto n = to_int("permanence.k_exit", v);
         require(n >= 2 && n <= 1000, "permanence.k_exit", "2 <= k_exit <= 1000");
         c.permanence.k_exit = static_cast<int>(n);
       }},
      {"permanence.m_edge_frac", "edge band width as a fraction of min(H,W); floor 2 px",
       [](const Config& c) { return format_shortest(c.permanence.m_edge_frac); },
       [](Config& c, const std::string& v) {
         auto d = to_double("permanence.m_edge_frac", v);
         require(d >= 0.0 && d <= 0.5, "permanence.m_edge_frac", "0 <= m_edge_frac <= 0.5");
         c.permanence.m_edge_frac = d;
       }},
      {"permanence.theta_occ", "occluder coverage fraction that exempts a disappearance",
       [](const Config& c) { return format_shortest(c.permanence.theta_occ); },
       [](Config& c, const std::string& v) {
         auto d = to_double("permanence.theta_occ", v);
         require(d > 0.0 && d <= 1.0, "permanence.theta_occ", "0 < theta_occ <= 1");
         c.permanence.theta_occ = d;
       }},
      {"relations.tau_jump", "distance jump threshold in mean box diagonals",
       [](const Config& c) { return format_shortest(c.relations.tau_jump); },
       [](Config& c, const std::string& v) {
         auto d = to_double("relations.tau_jump", v);
         require(d > 0.0, "relations.tau_jump", "tau_jump > 0");
         c.relations.tau_jump = d;
       }},
      {"causality.v_min", "speed (px/frame) above which an object is moving",
       [](const Config& c) { return format_shortest(c.causality.v_min); },
       [](Config& c, const std::string& v) {
         auto d = to_double("causality.v_min", v);
         require(d >= 0.0, "causality.v_min", "v_min >= 0");
         c.causality.v_min = d;
       }},
      {"causality.alpha_max", "acceleration threshold as a fraction of box diagonal per frame^2",
       [](const Config& c) { return format_shortest(c.causality.alpha_max); },
       [](Config& c, const std::string& v) {
         auto d = to_double("causality.alpha_max", v);
         require(d > 0.0, "causality.alpha_max", "alpha_max > 0");
         c.causality.alpha_max = d;
       }},
      {"causality.w_cause", "frames searched backwards for a cause",
       [](const Config& c) { return std::to_string(c.causality.w_cause); },
       [](Config& c, const std::string& v) {
         auto n = to_int("causality.w_cause", v);
         require(n >= 0 && n <= 1000, "causality.w_cause", "0 <= w_cause <= 1000");
         c.causality.w_cause = static_cast<int>(n);
       }},
      {"causality.w_effect", "frames searched forwards for a reaction",
       [](const Config& c) { return std::to_string(c.causality.w_effect); },
       [](Config& c, const std::string& v) {
         auto n = to_int("causality.w_effect", v);
         require(n >= 0 && n <= 1000, "causality.w_effect", "0 <= w_effect <= 1000");
         c.causality.w_effect = static_cast<int>(n);
       }},
      {"causality.p_near_frac", "near-contact margin as a fraction of box diagonal",
       [](const Config& c) { return format_shortest(c.causality.p_near_frac); },
       [](Config& c, const std::string& v) {
         auto d = to_double("causality.p_near_frac", v);
         require(d >= 0.0, "causality.p_near_frac", "p_near_frac >= 0");
         c.causality.p_near_frac = d;
       }},
      {"causality.agent_classes", "comma-separated class labels allowed to self-propel",
       [](const Config& c) { return join(c.causality.agent_classes, ','); },
       [](Config& c, const std::string& v) {
         c.causality.agent_classes.clear();
         for (auto cell : split_csv(v))
           if (!cell.empty()) c.causality.agent_classes.emplace_back(cell);
       }},
      {"flicker.c_max", "per-pixel residual clamp as a fraction of 255",
       [](const Config& c) { return format_shortest(c.flicker.c_max); },
       [](Config& c, const std::string& v) {
         auto d = to_double("flicker.c_max", v);
         require(d > 0.0 && d <= 1.0, "flicker.c_max", "0 < c_max <= 1");
         c.flicker.c_max = d;
       }},
      {"flicker.tau_cut", "raw residual above which a transition is flagged as a shot cut",
       [](const Config& c) { return format_shortest(c.flicker.tau_cut); },
       [](Config& c, const std::string& v) {
         auto d = to_double("flicker.tau_cut", v);
         require(d > 0.0, "flicker.tau_cut", "tau_cut > 0");
         c.flicker.tau_cut = d;
       }},
      {"flicker.static_region_mode", "exclude moving-object boxes from residuals when tracks exist",
       [](const Config& c) { return std::string(c.flicker.static_region_mode ? "true" : "false"); },
       [](Config& c, const std::string& v) { c.flicker.static_region_mode = to_bool("flicker.static_region_mode", v); }},
      {"flicker.cut_exclusion", "drop flagged shot-cut transitions from the mean",
       [](const Config& c) { return std::string(c.flicker.cut_exclusion ? "true" : "false"); },
       [](Config& c, const std::string& v) { c.flicker.cut_exclusion = to_bool("flicker.cut_exclusion", v); }},
      {"flicker.dilation", "pixels added around moving-object boxes in static-region mode",
       [](const Config& c) { return format_shortest(c.flicker.dilation); },
       [](Config& c, const std::string& v) {
         auto d = to_double("flicker.dilation", v);
         require(d >= 0.0, "flicker.dilation", "dilation >= 0");
         c.flicker.dilation = d;
       }},
      {"combiner.standardize", "standardize features before fitting weights",
       [](const Config& c) { return std::string(c.combiner.standardize ? "true" : "false"); },
       [](Config& c, const std::string& v) { c.combiner.standardize = to_bool("combiner.standardize", v); }},
      {"harness.train_fraction", "fraction of videos assigned to the training split",
       [](const Config& c) { return format_shortest(c.harness.train_fraction); },
       [](Config& c, const std::string& v) {
         auto d = to_double("harness.train_fraction", v);
         require(d > 0.0 && d < 1.0, "harness.train_fraction", "0 < train_fraction < 1");
         c.harness.train_fraction = d;
       }},
      {"harness.split_seed", "seed mixed into the video_id split hash",
       [](const Config& c) { return std::to_string(c.harness.split_seed); },
       [](Config& c, const std::string& v) {
         auto n = parse_number<std::uint64_t>(v);
         if (!n) throw ValidationError("config harness.split_seed: expected an unsigned integer");
         c.harness.split_seed = *n;
       }},
      {"harness.aggregation", "per-model aggregation of video scores: mean or median",
       [](const Config& c) { return c.harness.aggregation; },
       [](Config& c, const std::string& v) {
         require(v == "mean" || v == "median", "harness.aggregation", "mean or median");
         c.harness.aggregation = v;
       }},
  };
  return keys;
}

/// Applies "section.key=value"; unknown keys are an error.
inline void apply_setting(Config& cfg, const std::string& name, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == name) {
      k.set(cfg, value);
      return;
    }
  }
  throw ValidationError("unknown config key: " + name);
}

inline void apply_ini(Config& cfg, const IniFile& ini) {
  for (const auto& sec : ini.sections)
    for (const auto& e : sec.entries) apply_setting(cfg, sec.name + "." + e.key, e.value);
}

inline Config load_config(const fs::path& path) {
  Config cfg;
  apply_ini(cfg, parse_ini(detail::read_file(path), path.string()));
  return cfg;
}

/// "key = default  # description" lines for help output.
inline std::string describe_config_keys() {
  const Config defaults;
  std::string out;
  for (const auto& k : config_keys()) {
    std::string line = "  " + k.name + " = " + k.get(defaults);
    if (line.size() < 44) line.resize(44, ' ');
    out += line + "  " + k.description + "\n";
  }
  return out;
}

}  // namespace wcs
