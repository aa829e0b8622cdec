#ifndef VIDEC_CONFIG_HPP
#define VIDEC_CONFIG_HPP

// JSON <-> configuration structs. Overrides are strict: unknown keys are errors.

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "videc/eval.hpp"
#include "videc/montage.hpp"
#include "videc/preprocess.hpp"
#include "videc/synth.hpp"

namespace videc {

using nlohmann::json;

namespace detail {

inline void check_keys(const json &j, const char *what, std::initializer_list<const char *> allowed) {
  if (!j.is_object())
    throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto &[key, value] : j.items()) {
    bool ok = false;
    for (const char *a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_key(const json &j, const char *key, T &out, const char *what) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(std::string(what) + "." + key + ": " + e.what());
  }
}

inline json range_json(Range r) { return json::array({r.lo, r.hi}); }

inline void read_range(const json &j, const char *key, Range &out, const char *what) {
  if (!j.contains(key))
    return;
  const auto &v = j.at(key);
  if (v.is_number()) {
    out = {v.get<double>(), v.get<double>()};
    return;
  }
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(std::string(what) + "." + key + ": expected a number or [lo, hi]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

inline json window_json(TimeWindow w) { return json::array({w.start, w.end}); }

inline TimeWindow window_from(const json &v, const std::string &what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(what + ": expected [start, end] in seconds");
  return {v[0].get<double>(), v[1].get<double>()};
}

} // namespace detail

// ---- synth ---------------------------------------------------------------

inline json to_json(const SynthConfig &c) {
  json regions = json::array();
  for (const auto &r : c.regions)
    regions.push_back({{"name", r.name}, {"channels", r.channels}, {"gain_early", r.gain_early},
                       {"gain_late", r.gain_late}});
  return {{"n_classes", c.n_classes},
          {"class_labels", c.labels()},
          {"trials_per_class", c.trials_per_class},
          {"n_channels", c.n_channels},
          {"fs_raw", c.fs_raw},
          {"epoch_s", c.epoch_s},
          {"gain_split_s", c.gain_split_s},
          {"rest_s", detail::range_json(c.rest_s)},
          {"cue_s", detail::range_json(c.cue_s)},
          {"cross_s", detail::range_json(c.cross_s)},
          {"tail_s", c.tail_s},
          {"regions", regions},
          {"snr_db", std::isfinite(c.snr_db) ? json(c.snr_db) : json("-inf")},
          {"noise_rms_uv", c.noise_rms_uv},
          {"source_band_hz", detail::range_json(c.source_band_hz)},
          {"amplitude_jitter", c.amplitude_jitter},
          {"wishart_dof_ratio", c.wishart_dof_ratio},
          {"seed", c.seed}};
}

inline void apply_json(SynthConfig &c, const json &j) {
  constexpr const char *w = "synth";
  detail::check_keys(j, w,
                     {"n_classes", "class_labels", "trials_per_class", "n_channels", "fs_raw", "epoch_s",
                      "gain_split_s", "rest_s", "cue_s", "cross_s", "tail_s", "regions", "snr_db", "noise_rms_uv",
                      "source_band_hz", "amplitude_jitter", "wishart_dof_ratio", "seed"});
  detail::read_key(j, "n_classes", c.n_classes, w);
  detail::read_key(j, "class_labels", c.class_labels, w);
  if (j.contains("class_labels") && !j.contains("n_classes"))
    c.n_classes = c.class_labels.size();
  detail::read_key(j, "trials_per_class", c.trials_per_class, w);
  detail::read_key(j, "n_channels", c.n_channels, w);
  detail::read_key(j, "fs_raw", c.fs_raw, w);
  detail::read_key(j, "epoch_s", c.epoch_s, w);
  detail::read_key(j, "gain_split_s", c.gain_split_s, w);
  detail::read_range(j, "rest_s", c.rest_s, w);
  detail::read_range(j, "cue_s", c.cue_s, w);
  detail::read_range(j, "cross_s", c.cross_s, w);
  detail::read_key(j, "tail_s", c.tail_s, w);
  if (j.contains("regions")) {
    c.regions.clear();
    for (const auto &r : j.at("regions")) {
      detail::check_keys(r, "synth.regions[]", {"name", "channels", "gain_early", "gain_late"});
      RegionSpec spec;
      detail::read_key(r, "name", spec.name, "synth.regions[]");
      detail::read_key(r, "channels", spec.channels, "synth.regions[]");
      detail::read_key(r, "gain_early", spec.gain_early, "synth.regions[]");
      detail::read_key(r, "gain_late", spec.gain_late, "synth.regions[]");
      c.regions.push_back(std::move(spec));
    }
  }
  if (j.contains("snr_db")) {
    const auto &v = j.at("snr_db");
    if (v.is_string() && v.get<std::string>() == "-inf")
      c.snr_db = -std::numeric_limits<double>::infinity();
    else
      detail::read_key(j, "snr_db", c.snr_db, w);
  }
  detail::read_key(j, "noise_rms_uv", c.noise_rms_uv, w);
  detail::read_range(j, "source_band_hz", c.source_band_hz, w);
  detail::read_key(j, "amplitude_jitter", c.amplitude_jitter, w);
  detail::read_key(j, "wishart_dof_ratio", c.wishart_dof_ratio, w);
  detail::read_key(j, "seed", c.seed, w);
}

// ---- preprocess ----------------------------------------------------------

inline json to_json(const PreprocessConfig &c) {
  return {{"target_fs", c.target_fs},
          {"filter_order", c.filter_order},
          {"band_hz", json::array({c.band_low_hz, c.band_high_hz})},
          {"filter_mode", to_string(c.filter_mode)},
          {"stage_order", to_string(c.stage_order)},
          {"epoch_window", detail::window_json(c.epoch_window)},
          {"baseline_window", detail::window_json(c.baseline_window)},
          {"classes", c.classes},
          {"allow_empty", c.allow_empty},
          {"resampler", {{"window", "kaiser"},
                         {"stopband_db", ResamplerDesign{}.stopband_db},
                         {"transition_fraction", ResamplerDesign{}.transition_fraction},
                         {"max_denominator", 1000}}}};
}

inline void apply_json(PreprocessConfig &c, const json &j) {
  constexpr const char *w = "preprocess";
  detail::check_keys(j, w,
                     {"target_fs", "filter_order", "band_hz", "filter_mode", "stage_order", "epoch_window",
                      "baseline_window", "classes", "allow_empty", "resampler"});
  detail::read_key(j, "target_fs", c.target_fs, w);
  detail::read_key(j, "filter_order", c.filter_order, w);
  if (j.contains("band_hz")) {
    const auto b = detail::window_from(j.at("band_hz"), "preprocess.band_hz");
    c.band_low_hz = b.start;
    c.band_high_hz = b.end;
  }
  if (j.contains("filter_mode"))
    c.filter_mode = parse_filter_mode(j.at("filter_mode").get<std::string>());
  if (j.contains("stage_order"))
    c.stage_order = parse_stage_order(j.at("stage_order").get<std::string>());
  if (j.contains("epoch_window"))
    c.epoch_window = detail::window_from(j.at("epoch_window"), "preprocess.epoch_window");
  if (j.contains("baseline_window"))
    c.baseline_window = detail::window_from(j.at("baseline_window"), "preprocess.baseline_window");
  detail::read_key(j, "classes", c.classes, w);
  detail::read_key(j, "allow_empty", c.allow_empty, w);
  if (j.contains("resampler") && j.at("resampler") != to_json(PreprocessConfig{}).at("resampler"))
    throw ConfigError("preprocess.resampler: the anti-alias design is fixed and cannot be overridden");
}

// ---- evaluation grid -----------------------------------------------------

struct GroupSpec {
  std::string name;
  std::vector<std::string> channels; // empty: all channels
  int m = 1;
};

struct GridConfig {
  std::vector<TimeWindow> intervals{{0.0, 1.0}, {1.0, 2.0}};
  std::vector<GroupSpec> groups{{"all64", {}, 3},
                                {"visual9", default_occipital_group(), 1},
                                {"prefrontal9", default_prefrontal_group(), 1}};
  CvConfig cv;
  CspOptions csp;
  RldaOptions rlda;
  bool keep_models = false;
};

/// "0-1", "1-2", "0.5-1.25": stable directory-safe interval name.
inline std::string interval_name(TimeWindow w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g-%g", w.start, w.end);
  return buf;
}

/// Table column header: "0 - 1 s".
inline std::string interval_header(TimeWindow w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g - %g s", w.start, w.end);
  return buf;
}

inline TimeWindow parse_interval(const std::string &s) {
  const auto dash = s.find('-', 1);
  if (dash == std::string::npos)
    throw ConfigError("interval '" + s + "': expected start-end in seconds, e.g. 0-1");
  try {
    std::size_t used_a = 0, used_b = 0;
    const double a = std::stod(s.substr(0, dash), &used_a);
    const double b = std::stod(s.substr(dash + 1), &used_b);
    if (used_a != dash || used_b != s.size() - dash - 1 || !(b > a))
      throw ConfigError("");
    return {a, b};
  } catch (const std::exception &) {
    throw ConfigError("interval '" + s + "': expected start-end in seconds with end > start, e.g. 0-1");
  }
}

inline json to_json(const GridConfig &g) {
  json intervals = json::array();
  for (const auto &w : g.intervals)
    intervals.push_back(detail::window_json(w));
  json groups = json::array();
  for (const auto &gr : g.groups)
    groups.push_back({{"name", gr.name}, {"channels", gr.channels}, {"m", gr.m}});
  return {{"intervals", intervals},
          {"groups", groups},
          {"k", g.cv.k},
          {"cv_mode", to_string(g.cv.mode)},
          {"stratified", g.cv.stratified},
          {"test_fraction", g.cv.test_fraction},
          {"cv_seed", g.cv.seed},
          {"csp_ridge_guard", g.csp.ridge_guard},
          {"csp_max_condition", g.csp.max_condition},
          {"rlda_fixed_gamma", g.rlda.fixed_gamma},
          {"keep_models", g.keep_models}};
}

inline void apply_json(GridConfig &g, const json &j) {
  constexpr const char *w = "evaluate";
  detail::check_keys(j, w,
                     {"intervals", "groups", "k", "cv_mode", "stratified", "test_fraction", "cv_seed",
                      "csp_ridge_guard", "csp_max_condition", "rlda_fixed_gamma", "keep_models"});
  if (j.contains("intervals")) {
    g.intervals.clear();
    for (const auto &v : j.at("intervals"))
      g.intervals.push_back(v.is_string() ? parse_interval(v.get<std::string>())
                                          : detail::window_from(v, "evaluate.intervals[]"));
  }
  if (j.contains("groups")) {
    g.groups.clear();
    for (const auto &v : j.at("groups")) {
      detail::check_keys(v, "evaluate.groups[]", {"name", "channels", "m"});
      GroupSpec s;
      detail::read_key(v, "name", s.name, "evaluate.groups[]");
      detail::read_key(v, "channels", s.channels, "evaluate.groups[]");
      detail::read_key(v, "m", s.m, "evaluate.groups[]");
      g.groups.push_back(std::move(s));
    }
  }
  detail::read_key(j, "k", g.cv.k, w);
  if (j.contains("cv_mode"))
    g.cv.mode = parse_cv_mode(j.at("cv_mode").get<std::string>());
  detail::read_key(j, "stratified", g.cv.stratified, w);
  detail::read_key(j, "test_fraction", g.cv.test_fraction, w);
  detail::read_key(j, "cv_seed", g.cv.seed, w);
  detail::read_key(j, "csp_ridge_guard", g.csp.ridge_guard, w);
  detail::read_key(j, "csp_max_condition", g.csp.max_condition, w);
  detail::read_key(j, "rlda_fixed_gamma", g.rlda.fixed_gamma, w);
  detail::read_key(j, "keep_models", g.keep_models, w);
}

/// Built-in groups addressable by name on the command line.
inline GroupSpec builtin_group(const std::string &name) {
  for (const auto &g : GridConfig{}.groups)
    if (g.name == name)
      return g;
  throw ConfigError("unknown channel group '" + name + "' (built-in: all64, visual9, prefrontal9)");
}

} // namespace videc

#endif // VIDEC_CONFIG_HPP
