// videc: command-line front end for the decoding toolkit.
//
//   videc synth      --out ds/                 synthetic recording (BTD)
//   videc preprocess --in ds/ --out ep/        resample, filter, epoch, baseline
//   videc evaluate   --in ep/ --out res/       interval x group cross-validation grid
//   videc stats      --in res/ --out st/       bootstrap tests between grid cells
//   videc patterns   --in ep/ --out pat/       OVR-CSP patterns and filters as CSV
//   videc report     --in res/ --out rep/      re-render accuracy tables

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "videc/videc.hpp"

namespace fs = std::filesystem;
using namespace videc;

namespace {

bool g_quiet = false;

void info(const std::string &msg) {
  if (!g_quiet)
    std::cerr << msg << "\n";
}

void warn(const std::string &msg) { std::cerr << "warning: " << msg << "\n"; }

struct Globals {
  std::uint64_t seed = 1;
  CLI::Option *seed_opt = nullptr;
  std::string out;
  unsigned jobs = 1;
  std::string config_path;
  bool record_time = false;

  bool seed_given() const { return seed_opt && seed_opt->count() > 0; }
};

/// Config file: {"seed", "synth", "preprocess", "evaluate", "stats", "patterns",
/// "datasets", "permute_labels"}, or a manifest written by a previous run (its
/// "config" member is used).
json load_config(const std::string &path) {
  if (path.empty())
    return json::object();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (j.is_object() && j.contains("tool") && j.contains("config"))
    j = j.at("config");
  if (!j.is_object())
    throw ConfigError("config '" + path + "': expected a JSON object");
  for (const auto &[key, value] : j.items()) {
    if (key != "seed" && key != "synth" && key != "preprocess" && key != "evaluate" && key != "stats" &&
        key != "patterns" && key != "datasets" && key != "permute_labels")
      throw ConfigError("config '" + path + "': unknown section '" + key + "'");
  }
  return j;
}

std::uint64_t resolve_seed(const Globals &g, const json &cfg) {
  if (g.seed_given() || !cfg.contains("seed"))
    return g.seed;
  return cfg.at("seed").get<std::uint64_t>();
}

fs::path require_out(const Globals &g) {
  if (g.out.empty())
    throw ConfigError("--out is required");
  fs::create_directories(g.out);
  return g.out;
}

/// Loads an epoch set, preprocessing on the fly when `dir` holds a continuous recording.
EpochSet load_epochs_any(const fs::path &dir, const PreprocessConfig &pre, bool &preprocessed) {
  preprocessed = false;
  if (fs::exists(dir / btd::kEpochs))
    return load_epochs(dir);
  if (fs::exists(dir / btd::kData)) {
    preprocessed = true;
    info("preprocessing " + dir.string());
    return preprocess_recording(load_recording(dir), pre);
  }
  throw DataError(DataError::Kind::missing_file,
                  "'" + dir.string() + "' holds neither epochs.f32le nor data.f32le");
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::optional<double> snr_db;
  std::optional<std::size_t> trials_per_class;
  std::optional<std::size_t> n_channels;
  std::optional<std::size_t> n_classes;
  std::optional<double> fs_raw;
};

int cmd_synth(const Globals &g, const SynthArgs &a) {
  const json file = load_config(g.config_path);
  SynthConfig cfg;
  if (file.contains("synth"))
    apply_json(cfg, file.at("synth"));
  cfg.seed = file.contains("synth") && file.at("synth").contains("seed") && !g.seed_given()
                 ? cfg.seed
                 : resolve_seed(g, file);
  if (a.snr_db)
    cfg.snr_db = *a.snr_db;
  if (a.trials_per_class)
    cfg.trials_per_class = *a.trials_per_class;
  if (a.n_channels)
    cfg.n_channels = *a.n_channels;
  if (a.n_classes) {
    cfg.n_classes = *a.n_classes;
    cfg.class_labels.clear();
  }
  if (a.fs_raw)
    cfg.fs_raw = *a.fs_raw;
  validate(cfg);

  const auto out = require_out(g);
  info("generating " + std::to_string(cfg.n_classes * cfg.trials_per_class) + " trials, " +
       std::to_string(cfg.n_channels) + " channels");
  const auto rec = generate_dataset(cfg);
  save_recording(rec, out);
  write_file_atomic(out / "ground_truth.json", to_json(describe_ground_truth(cfg)).dump(2) + "\n");

  RunManifest m;
  m.command = "synth";
  m.config = {{"seed", cfg.seed}, {"synth", to_json(cfg)}};
  m.record_time = g.record_time;
  m.write(out);
  info("wrote " + out.string());
  return 0;
}

// ---- preprocess ----------------------------------------------------------

struct PreprocessArgs {
  std::string in;
  std::optional<std::string> filter_mode;
  std::optional<std::string> stage_order;
  std::optional<double> target_fs;
  std::vector<std::string> classes;
  bool allow_empty = false;
};

PreprocessConfig resolve_preprocess(const json &file, const PreprocessArgs *a) {
  PreprocessConfig cfg;
  if (file.contains("preprocess"))
    apply_json(cfg, file.at("preprocess"));
  if (a) {
    if (a->filter_mode)
      cfg.filter_mode = parse_filter_mode(*a->filter_mode);
    if (a->stage_order)
      cfg.stage_order = parse_stage_order(*a->stage_order);
    if (a->target_fs)
      cfg.target_fs = *a->target_fs;
    if (!a->classes.empty())
      cfg.classes = a->classes;
    if (a->allow_empty)
      cfg.allow_empty = true;
  }
  return cfg;
}

int cmd_preprocess(const Globals &g, const PreprocessArgs &a) {
  const json file = load_config(g.config_path);
  const auto cfg = resolve_preprocess(file, &a);
  if (a.in.empty())
    throw ConfigError("--in is required");
  auto rec = load_recording(a.in);
  const double fs_filter = cfg.stage_order == StageOrder::resample_then_filter ? cfg.target_fs : rec.fs();
  const auto filter = design_butterworth_bandpass(cfg.filter_order, cfg.band_low_hz, cfg.band_high_hz, fs_filter);
  const auto out = require_out(g);
  const auto epochs = preprocess_recording(std::move(rec), cfg);
  save_epochs(epochs, out);
  write_file_atomic(out / "filter.json", to_json(filter).dump(2) + "\n");

  RunManifest m;
  m.command = "preprocess";
  m.config = {{"preprocess", to_json(cfg)}};
  m.record_time = g.record_time;
  m.add_input(a.in, out);
  m.write(out);
  info("wrote " + std::to_string(epochs.n_trials()) + " epochs to " + out.string());
  return 0;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> in;
  std::vector<std::string> names;
  std::vector<std::string> groups;
  std::vector<std::string> intervals;
  std::optional<std::size_t> k;
  std::optional<std::string> cv_mode;
  bool keep_models = false;
  bool permute_labels = false;
};

struct CellJob {
  std::size_t dataset = 0;
  GroupSpec group;
  TimeWindow interval;
};

std::string cell_id(const GroupSpec &g, TimeWindow w) { return interval_name(w) + "__" + g.name; }

bool has_channels(const EpochSet &e, const std::vector<std::string> &names, std::string &missing) {
  for (const auto &n : names) {
    if (std::find(e.channel_names().begin(), e.channel_names().end(), n) == e.channel_names().end()) {
      missing = n;
      return false;
    }
  }
  return true;
}

int cmd_evaluate(const Globals &g, const EvaluateArgs &a) {
  const json file = load_config(g.config_path);
  GridConfig grid;
  if (file.contains("evaluate"))
    apply_json(grid, file.at("evaluate"));
  if (!(file.contains("evaluate") && file.at("evaluate").contains("cv_seed")) || g.seed_given())
    grid.cv.seed = resolve_seed(g, file);
  if (!a.groups.empty()) {
    grid.groups.clear();
    for (const auto &n : a.groups)
      grid.groups.push_back(builtin_group(n));
  }
  if (!a.intervals.empty()) {
    grid.intervals.clear();
    for (const auto &s : a.intervals)
      grid.intervals.push_back(parse_interval(s));
  }
  if (a.k)
    grid.cv.k = *a.k;
  if (a.cv_mode)
    grid.cv.mode = parse_cv_mode(*a.cv_mode);
  if (a.keep_models)
    grid.keep_models = true;
  grid.cv.keep_models = grid.keep_models;
  const auto pre = resolve_preprocess(file, nullptr);

  if (a.in.empty())
    throw ConfigError("--in is required (one or more epoch or recording directories)");
  if (!a.names.empty() && a.names.size() != a.in.size())
    throw ConfigError("--name must be given once per --in");
  auto given_names = a.names;
  if (given_names.empty() && file.contains("datasets")) {
    given_names = file.at("datasets").get<std::vector<std::string>>();
    if (given_names.size() != a.in.size())
      throw ConfigError("config lists " + std::to_string(given_names.size()) + " dataset names for " +
                        std::to_string(a.in.size()) + " inputs");
  }
  const bool permute = a.permute_labels || file.value("permute_labels", false);
  const auto out = require_out(g);

  std::vector<std::string> names;
  std::vector<EpochSet> sets;
  bool any_preprocessed = false;
  for (std::size_t i = 0; i < a.in.size(); ++i) {
    names.push_back(given_names.empty() ? fs::path(a.in[i]).lexically_normal().filename().string()
                                        : given_names[i]);
    if (names.back().empty())
      names.back() = fs::weakly_canonical(a.in[i]).filename().string();
    bool pre_used = false;
    auto e = load_epochs_any(a.in[i], pre, pre_used);
    any_preprocessed = any_preprocessed || pre_used;
    if (permute) {
      auto labels = e.labels();
      auto rng = make_rng(grid.cv.seed, {0x7065726dULL, i});
      std::shuffle(labels.begin(), labels.end(), rng);
      e = relabel(e, labels);
    }
    sets.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (names[i] == names[j])
        throw ConfigError("dataset name '" + names[i] + "' is used twice; pass distinct --name values");

  std::vector<CellJob> jobs;
  for (std::size_t d = 0; d < sets.size(); ++d)
    for (const auto &gr : grid.groups)
      for (const auto &w : grid.intervals)
        jobs.push_back({d, gr, w});

  std::vector<std::optional<CvResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::vector<int> error_codes(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto &job = jobs[j];
      const auto &e = sets[job.dataset];
      const auto dir = out / "res" / names[job.dataset] / cell_id(job.group, job.interval);
      try {
        std::string missing;
        if (!has_channels(e, job.group.channels, missing))
          throw DataError(DataError::Kind::dimension_mismatch, "channel '" + missing + "' not in dataset");
        PipelineConfig p;
        p.group = job.group.name;
        p.channels = job.group.channels;
        p.interval = job.interval;
        p.m = job.group.m;
        p.csp = grid.csp;
        p.rlda = grid.rlda;
        auto r = cross_validate(e, p, grid.cv);
        json cj = to_json(r);
        cj["cell"] = {{"dataset", names[job.dataset]},
                      {"group", job.group.name},
                      {"channels", job.group.channels},
                      {"m", job.group.m},
                      {"interval", json::array({job.interval.start, job.interval.end})}};
        write_file_atomic(dir / "cv.json", cj.dump(2) + "\n");
        write_file_atomic(dir / "folds.csv", folds_csv(r));
        write_file_atomic(dir / "confusion.csv", confusion_csv(r));
        {
          std::lock_guard lock(log_mu);
          char buf[200];
          std::snprintf(buf, sizeof buf, "%s %s: %.1f%% \xC2\xB1 %.1f", names[job.dataset].c_str(),
                        cell_id(job.group, job.interval).c_str(), 100 * r.mean_accuracy, 100 * r.std_accuracy);
          info(buf);
        }
        results[j] = std::move(r);
      } catch (const Error &ex) {
        errors[j] = ex.what();
        error_codes[j] = ex.exit_code();
        std::lock_guard lock(log_mu);
        warn("skipping cell " + names[job.dataset] + "/" + cell_id(job.group, job.interval) + ": " + ex.what());
      }
    }
  };
  const unsigned n_threads = std::max(1U, std::min<unsigned>(g.jobs, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  std::vector<ReportCell> cells;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (results[j])
      cells.push_back({names[jobs[j].dataset], jobs[j].group.name, jobs[j].interval, results[j]->mean_accuracy,
                       results[j]->std_accuracy});
  if (cells.empty()) {
    const auto code = *std::max_element(error_codes.begin(), error_codes.end());
    std::cerr << "error: every grid cell failed\n";
    return code == 0 ? 1 : code;
  }
  const auto report = render_report(cells, grid.groups, grid.intervals);
  write_file_atomic(out / "report.txt", report);
  if (!g_quiet)
    std::cout << report;

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"seed", grid.cv.seed}, {"evaluate", to_json(grid)}, {"datasets", names},
              {"permute_labels", permute}};
  if (any_preprocessed)
    m.config["preprocess"] = to_json(pre);
  m.record_time = g.record_time;
  for (const auto &in : a.in)
    m.add_input(in, out);
  m.write(out);
  return 0;
}

// ---- stats ---------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> in;
  std::optional<double> alpha;
  std::optional<std::size_t> resamples;
  bool unpaired = false;
  std::optional<std::string> sidedness;
  std::optional<std::string> paired_scheme;
  std::optional<std::string> granularity;
  std::vector<std::string> pairs;
};

struct CellData {
  std::string dataset;
  std::string id;
  std::string group;
  TimeWindow interval;
  CvResult result;
};

/// Built-in groups first in their canonical order, others alphabetically.
std::size_t group_rank(const std::string &name) {
  const GridConfig defaults;
  for (std::size_t i = 0; i < defaults.groups.size(); ++i)
    if (defaults.groups[i].name == name)
      return i;
  return defaults.groups.size();
}

bool group_before(const std::string &x, const std::string &y) {
  return group_rank(x) != group_rank(y) ? group_rank(x) < group_rank(y) : x < y;
}

std::vector<CellData> collect_cells(const std::vector<std::string> &inputs) {
  std::vector<CellData> cells;
  for (const auto &in : inputs) {
    const fs::path res = fs::path(in) / "res";
    if (!fs::is_directory(res))
      throw DataError(DataError::Kind::missing_file, "'" + in + "' has no res/ directory (run evaluate first)");
    for (const auto &rel : tree_files(res)) {
      if (fs::path(rel).filename() != "cv.json")
        continue;
      json j;
      try {
        j = json::parse(read_file(res / rel));
      } catch (const json::exception &e) {
        throw DataError(DataError::Kind::malformed, (res / rel).string() + ": " + e.what());
      }
      if (!j.contains("cell"))
        throw DataError(DataError::Kind::malformed, (res / rel).string() + ": missing cell description");
      const auto &c = j.at("cell");
      CellData d;
      d.dataset = c.at("dataset").get<std::string>();
      d.group = c.at("group").get<std::string>();
      d.interval = {c.at("interval")[0].get<double>(), c.at("interval")[1].get<double>()};
      d.id = interval_name(d.interval) + "__" + d.group;
      d.result = cv_result_from_json(j);
      cells.push_back(std::move(d));
    }
  }
  if (cells.empty())
    throw DataError(DataError::Kind::missing_file, "no cv.json files found under the given inputs");
  return cells;
}

int cmd_stats(const Globals &g, const StatsArgs &a) {
  const json file = load_config(g.config_path);
  BootstrapOptions opt;
  std::string granularity = "folds";
  std::vector<std::pair<std::string, std::string>> pairs;
  opt.seed = resolve_seed(g, file);
  if (file.contains("stats")) {
    const auto &s = file.at("stats");
    for (const auto &[key, value] : s.items())
      if (key != "alpha" && key != "resamples" && key != "paired" && key != "sidedness" && key != "paired_scheme" &&
          key != "granularity" && key != "pairs" && key != "seed")
        throw ConfigError("stats: unknown key '" + key + "'");
    opt.alpha = s.value("alpha", opt.alpha);
    opt.resamples = s.value("resamples", opt.resamples);
    opt.paired = s.value("paired", opt.paired);
    if (s.contains("sidedness"))
      opt.sidedness = parse_sidedness(s.at("sidedness").get<std::string>());
    if (s.contains("paired_scheme"))
      opt.paired_scheme = parse_paired_scheme(s.at("paired_scheme").get<std::string>());
    granularity = s.value("granularity", granularity);
    if (s.contains("pairs"))
      for (const auto &p : s.at("pairs"))
        pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    if (s.contains("seed") && !g.seed_given())
      opt.seed = s.at("seed").get<std::uint64_t>();
  }
  if (a.alpha)
    opt.alpha = *a.alpha;
  if (a.resamples)
    opt.resamples = *a.resamples;
  if (a.unpaired)
    opt.paired = false;
  if (a.sidedness)
    opt.sidedness = parse_sidedness(*a.sidedness);
  if (a.paired_scheme)
    opt.paired_scheme = parse_paired_scheme(*a.paired_scheme);
  if (a.granularity)
    granularity = *a.granularity;
  if (granularity != "folds" && granularity != "means")
    throw ConfigError("--granularity must be folds or means");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw ConfigError("--alpha must be in (0, 1)");
  if (!a.pairs.empty()) {
    pairs.clear();
    for (const auto &p : a.pairs) {
      const auto comma = p.find(',');
      if (comma == std::string::npos)
        throw ConfigError("--pair expects CELL_A,CELL_B (e.g. 0-1__prefrontal9,1-2__prefrontal9)");
      pairs.emplace_back(p.substr(0, comma), p.substr(comma + 1));
    }
  }
  if (a.in.empty())
    throw ConfigError("--in is required (one or more evaluate output directories)");
  const auto cells = collect_cells(a.in);

  std::vector<std::string> datasets, ids;
  std::map<std::string, std::vector<std::string>> groups_of_interval;
  std::vector<std::string> group_order;
  std::vector<TimeWindow> interval_order;
  for (const auto &c : cells) {
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);
    if (std::find(ids.begin(), ids.end(), c.id) == ids.end())
      ids.push_back(c.id);
    if (std::find(group_order.begin(), group_order.end(), c.group) == group_order.end())
      group_order.push_back(c.group);
    if (std::none_of(interval_order.begin(), interval_order.end(),
                     [&](TimeWindow w) { return w.start == c.interval.start && w.end == c.interval.end; }))
      interval_order.push_back(c.interval);
  }
  std::sort(interval_order.begin(), interval_order.end(),
            [](TimeWindow x, TimeWindow y) { return x.start < y.start || (x.start == y.start && x.end < y.end); });
  std::sort(group_order.begin(), group_order.end(), group_before);
  auto has_id = [&](const std::string &id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); };

  if (pairs.empty()) {
    for (const auto &gr : group_order)
      for (std::size_t i = 0; i + 1 < interval_order.size(); ++i) {
        const auto x = interval_name(interval_order[i]) + "__" + gr;
        const auto y = interval_name(interval_order[i + 1]) + "__" + gr;
        if (has_id(x) && has_id(y))
          pairs.emplace_back(x, y);
      }
    for (const auto &w : interval_order) {
      const auto x = interval_name(w) + "__prefrontal9";
      const auto y = interval_name(w) + "__visual9";
      if (has_id(x) && has_id(y))
        pairs.emplace_back(x, y);
    }
  }
  if (pairs.empty())
    throw ConfigError("no cell pairs to compare; pass --pair CELL_A,CELL_B");

  auto samples = [&](const std::string &id) {
    std::vector<double> v;
    for (const auto &ds : datasets) {
      const auto it = std::find_if(cells.begin(), cells.end(),
                                   [&](const CellData &c) { return c.dataset == ds && c.id == id; });
      if (it == cells.end())
        throw DataError(DataError::Kind::missing_file, "cell '" + id + "' missing for dataset '" + ds + "'");
      if (granularity == "means")
        v.push_back(it->result.mean_accuracy);
      else
        v.insert(v.end(), it->result.fold_accuracies.begin(), it->result.fold_accuracies.end());
    }
    return v;
  };

  const auto out = require_out(g);
  json tests = json::array();
  std::string summary;
  for (const auto &[x, y] : pairs) {
    if (!has_id(x) || !has_id(y))
      throw ConfigError("unknown cell in pair '" + x + "," + y + "'");
    const auto sa = samples(x), sb = samples(y);
    const auto r = bootstrap_test(sa, sb, opt);
    json t = to_json(r);
    t["a"] = x;
    t["b"] = y;
    t["granularity"] = granularity;
    t["samples_a"] = sa;
    t["samples_b"] = sb;
    tests.push_back(t);
    char line[400];
    std::snprintf(line, sizeof line, "%-26s vs %-26s diff %+6.2f pts  t = %7.3f  p = %.4f  %s\n", x.c_str(),
                  y.c_str(), 100.0 * r.mean_difference, r.t_statistic, r.p_value,
                  r.significant() ? "significant" : "n.s.");
    summary += line;
  }
  json doc = {{"datasets", datasets},
              {"options", {{"alpha", opt.alpha},
                           {"resamples", opt.resamples},
                           {"paired", opt.paired},
                           {"paired_scheme", to_string(opt.paired_scheme)},
                           {"sidedness", to_string(opt.sidedness)},
                           {"granularity", granularity},
                           {"seed", opt.seed}}},
              {"tests", tests}};
  write_file_atomic(out / "stats.json", doc.dump(2) + "\n");
  write_file_atomic(out / "stats.txt", summary);
  if (!g_quiet)
    std::cout << summary;

  RunManifest m;
  m.command = "stats";
  json pair_json = json::array();
  for (const auto &[x, y] : pairs)
    pair_json.push_back({x, y});
  m.config = {{"seed", opt.seed},
              {"stats", {{"alpha", opt.alpha},
                         {"resamples", opt.resamples},
                         {"paired", opt.paired},
                         {"sidedness", to_string(opt.sidedness)},
                         {"paired_scheme", to_string(opt.paired_scheme)},
                         {"granularity", granularity},
                         {"pairs", pair_json}}}};
  m.record_time = g.record_time;
  for (const auto &in : a.in)
    m.add_input(in, out);
  m.write(out);
  return 0;
}

// ---- patterns ------------------------------------------------------------

struct PatternsArgs {
  std::string in;
  std::optional<std::string> group;
  std::optional<std::string> interval;
  std::optional<int> m;
};

int cmd_patterns(const Globals &g, const PatternsArgs &a) {
  const json file = load_config(g.config_path);
  GroupSpec group = builtin_group("all64");
  TimeWindow interval{0.0, 1.0};
  if (file.contains("patterns")) {
    const auto &p = file.at("patterns");
    for (const auto &[key, value] : p.items())
      if (key != "group" && key != "interval")
        throw ConfigError("patterns: unknown key '" + key + "'");
    if (p.contains("group")) {
      const auto &gj = p.at("group");
      group.name = gj.value("name", group.name);
      group.channels = gj.value("channels", group.channels);
      group.m = gj.value("m", group.m);
    }
    if (p.contains("interval"))
      interval = {p.at("interval").at(0).get<double>(), p.at("interval").at(1).get<double>()};
  }
  if (a.group)
    group = builtin_group(*a.group);
  if (a.interval)
    interval = parse_interval(*a.interval);
  if (a.m)
    group.m = *a.m;
  if (a.in.empty())
    throw ConfigError("--in is required");
  const auto pre = resolve_preprocess(file, nullptr);
  bool pre_used = false;
  const auto e = load_epochs_any(a.in, pre, pre_used);
  PipelineConfig p;
  p.group = group.name;
  p.channels = group.channels;
  p.interval = interval;
  p.m = group.m;
  const auto cell = prepare_cell(e, p);
  const auto model = ovr_csp_fit(cell, group.m);

  std::vector<Point2> positions;
  if (!cell.positions().empty())
    positions = cell.positions();
  else
    try {
      for (const auto &c : cell.channel_names())
        positions.push_back(position_10_10(c));
    } catch (const ConfigError &) {
      positions.clear(); // non-standard labels: x, y columns stay empty
    }

  const auto out = require_out(g);
  write_file_atomic(out / "model.json", to_json(model).dump(2) + "\n");
  for (const auto &label : model.class_set) {
    const auto &bank = model.banks[model.class_index(label)];
    write_file_atomic(out / "patterns" / (label + ".csv"),
                      weights_csv(csp_patterns(model, label), cell.channel_names(), positions, "pattern_"));
    write_file_atomic(out / "filters" / (label + ".csv"),
                      weights_csv(bank.filters, cell.channel_names(), positions, "filter_"));
  }

  RunManifest m;
  m.command = "patterns";
  m.config = {{"patterns", {{"group", {{"name", group.name}, {"channels", group.channels}, {"m", group.m}}},
                            {"interval", json::array({interval.start, interval.end})}}}};
  if (pre_used)
    m.config["preprocess"] = to_json(pre);
  m.record_time = g.record_time;
  m.add_input(a.in, out);
  m.write(out);
  info("wrote patterns for " + std::to_string(model.class_set.size()) + " classes to " + out.string());
  return 0;
}

// ---- report --------------------------------------------------------------

int cmd_report(const Globals &g, const std::vector<std::string> &in) {
  if (in.empty())
    throw ConfigError("--in is required (one or more evaluate output directories)");
  const auto cells = collect_cells(in);
  std::vector<ReportCell> rc;
  std::vector<GroupSpec> groups;
  std::vector<TimeWindow> intervals;
  const GridConfig defaults;
  for (const auto &c : cells) {
    rc.push_back({c.dataset, c.group, c.interval, c.result.mean_accuracy, c.result.std_accuracy});
    if (std::none_of(groups.begin(), groups.end(), [&](const GroupSpec &s) { return s.name == c.group; })) {
      GroupSpec s{c.group, {}, 0};
      for (const auto &d : defaults.groups)
        if (d.name == c.group)
          s.m = d.m;
      groups.push_back(s);
    }
    if (std::none_of(intervals.begin(), intervals.end(),
                     [&](TimeWindow w) { return w.start == c.interval.start && w.end == c.interval.end; }))
      intervals.push_back(c.interval);
  }
  std::sort(groups.begin(), groups.end(),
            [](const GroupSpec &x, const GroupSpec &y) { return group_before(x.name, y.name); });
  for (auto &s : groups) {
    if (s.m == 0) {
      // m of a custom group is recorded in its cv.json.
      for (const auto &inp : in)
        for (const auto &rel : tree_files(fs::path(inp) / "res"))
          if (fs::path(rel).filename() == "cv.json" && s.m == 0) {
            const auto j = json::parse(read_file(fs::path(inp) / "res" / rel));
            if (j.at("cell").at("group") == s.name)
              s.m = j.at("cell").at("m").get<int>();
          }
    }
  }
  std::sort(intervals.begin(), intervals.end(),
            [](TimeWindow x, TimeWindow y) { return x.start < y.start || (x.start == y.start && x.end < y.end); });
  const auto report = render_report(rc, groups, intervals);
  if (!g.out.empty()) {
    const auto out = require_out(g);
    write_file_atomic(out / "report.txt", report);
    RunManifest m;
    m.command = "report";
    m.record_time = g.record_time;
    for (const auto &i : in)
      m.add_input(i, out);
    m.write(out);
  }
  std::cout << report;
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"videc: offline multiclass EEG visual-imagery decoding"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Base seed for every randomized step (default 1)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Parallel workers for grid cells")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON config or a previous run's manifest.json")
      ->check(CLI::ExistingFile);
  app.add_flag("--record-time", g.record_time, "Add a timestamp to manifest.json (breaks byte-identity)");
  app.add_flag("-q,--quiet", g_quiet, "Only print warnings and errors");

  SynthArgs sa;
  auto *synth = app.add_subcommand("synth", "Generate a synthetic recording with ground truth");
  synth->add_option("--snr-db", sa.snr_db, "Source SNR in dB (-100 or below: sources off)");
  synth->add_option("--trials-per-class", sa.trials_per_class);
  synth->add_option("--channels", sa.n_channels, "Number of channels (prefix of the 64-channel montage)");
  synth->add_option("--classes", sa.n_classes);
  synth->add_option("--fs-raw", sa.fs_raw, "Sampling rate of the generated recording");

  PreprocessArgs pa;
  auto *preprocess = app.add_subcommand("preprocess", "Resample, band-pass, epoch and baseline-correct");
  preprocess->add_option("--in", pa.in, "Recording directory")->required();
  preprocess->add_option("--filter-mode", pa.filter_mode, "zero_phase (default) or forward");
  preprocess->add_option("--stage-order", pa.stage_order, "resample_then_filter (default) or filter_then_resample");
  preprocess->add_option("--target-fs", pa.target_fs);
  preprocess->add_option("--class", pa.classes, "Class label to keep (repeatable)");
  preprocess->add_flag("--allow-empty", pa.allow_empty, "Allow an empty epoch set");

  EvaluateArgs ea;
  auto *evaluate = app.add_subcommand("evaluate", "Cross-validate the interval x channel-group grid");
  evaluate->add_option("--in", ea.in, "Epoch or recording directories")->required();
  evaluate->add_option("--name", ea.names, "Dataset name per --in (default: directory name)");
  evaluate->add_option("--groups", ea.groups, "Built-in groups: all64 visual9 prefrontal9");
  evaluate->add_option("--intervals", ea.intervals, "Intervals as start-end seconds, e.g. 0-1 1-2");
  evaluate->add_option("--k", ea.k, "Folds (or repeats in monte_carlo mode)");
  evaluate->add_option("--cv-mode", ea.cv_mode, "kfold (default) or monte_carlo");
  evaluate->add_flag("--keep-models", ea.keep_models, "Store per-fold models in cv.json");
  evaluate->add_flag("--permute-labels", ea.permute_labels, "Shuffle trial labels (chance-level control)");

  StatsArgs ta;
  auto *stats = app.add_subcommand("stats", "Bootstrap tests between grid cells");
  stats->add_option("--in", ta.in, "Evaluate output directories")->required();
  stats->add_option("--alpha", ta.alpha, "Significance level (default 0.05)");
  stats->add_option("--B,--resamples", ta.resamples, "Bootstrap resamples (default 10000)");
  stats->add_flag("--unpaired", ta.unpaired, "Welch-type unpaired test");
  stats->add_option("--sidedness", ta.sidedness, "two-sided (default), greater or less");
  stats->add_option("--paired-scheme", ta.paired_scheme, "sign_flip (default) or centered");
  stats->add_option("--granularity", ta.granularity, "folds (default): datasets x folds; means: per-dataset means");
  stats->add_option("--pair", ta.pairs, "CELL_A,CELL_B, e.g. 0-1__prefrontal9,1-2__prefrontal9 (repeatable)");

  PatternsArgs pta;
  auto *patterns = app.add_subcommand("patterns", "Export OVR-CSP patterns and filters");
  patterns->add_option("--in", pta.in, "Epoch or recording directory")->required();
  patterns->add_option("--group", pta.group, "Built-in group (default all64)");
  patterns->add_option("--interval", pta.interval, "Interval, e.g. 0-1 (default)");
  patterns->add_option("--m", pta.m, "Filters per side (default: the group's m)");

  std::vector<std::string> report_in;
  auto *report = app.add_subcommand("report", "Render accuracy tables from evaluate outputs");
  report->add_option("--in", report_in, "Evaluate output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth)
      return cmd_synth(g, sa);
    if (*preprocess)
      return cmd_preprocess(g, pa);
    if (*evaluate)
      return cmd_evaluate(g, ea);
    if (*stats)
      return cmd_stats(g, ta);
    if (*patterns)
      return cmd_patterns(g, pta);
    if (*report)
      return cmd_report(g, report_in);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
