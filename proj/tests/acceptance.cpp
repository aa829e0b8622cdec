// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "videc/videc.hpp"

using namespace videc;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kChanceLo = 0.137;
constexpr double kChanceHi = 0.197;
constexpr double kChanceMaxSeconds = 120.0;
constexpr double kAlpha = 0.05;
constexpr int kDirectionSeeds = 10;
constexpr int kDirectionMinHeld = 9;
constexpr int kCspPairs = 1000;
constexpr double kCspResidual = 1e-8;
constexpr double kCspPairing = 1e-10;
constexpr double kEdgeDb = -3.0103;
constexpr double kEdgeTolDb = 0.1;
constexpr double kRejectDb = -120.0;
constexpr int kGammaFixtures = 100;
constexpr double kGammaTol = 1e-10;
constexpr double kSolveResidual = 1e-8;
constexpr int kNullTests = 1000;
constexpr double kNullLo = 0.03;
constexpr double kNullHi = 0.07;
constexpr double kSignFlipTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const Outcome &o) {
  std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

void guarded(int id, const std::string &name, const std::function<Outcome()> &fn) {
  try {
    report(id, name, fn());
  } catch (const std::exception &e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EpochSet default_epochs(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  return preprocess_recording(generate_dataset(cfg), PreprocessConfig{});
}

CvResult run_cell(const EpochSet &e, const std::string &group, TimeWindow w, std::uint64_t seed) {
  const auto g = builtin_group(group);
  PipelineConfig p;
  p.group = g.name;
  p.channels = g.channels;
  p.m = g.m;
  p.interval = w;
  CvConfig cv;
  cv.seed = seed;
  return cross_validate(e, p, cv);
}

StatTestResult compare(const CvResult &a, const CvResult &b, std::uint64_t seed) {
  BootstrapOptions opt;
  opt.seed = seed;
  return bootstrap_test(a.fold_accuracies, b.fold_accuracies, opt);
}

Eigen::MatrixXd random_spd(Eigen::Index d, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(d);
  for (Eigen::Index i = 0; i < d; ++i)
    ev(i) = std::pow(10.0, u(rng));
  Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2.0;
}

double gamma_by_hand(const Eigen::MatrixXd &x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  const double nn = static_cast<double>(n);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < d; ++i)
      mu(i) += x(k, i) / nn;
  double nu = 0.0;
  Eigen::MatrixXd s(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        acc += (x(k, i) - mu(i)) * (x(k, j) - mu(j));
      s(i, j) = acc / (nn - 1.0);
    }
  for (Eigen::Index i = 0; i < d; ++i)
    nu += s(i, i) / static_cast<double>(d);
  double var_sum = 0.0, target = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      double wbar = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        wbar += (x(k, i) - mu(i)) * (x(k, j) - mu(j)) / nn;
      double v = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double w = (x(k, i) - mu(i)) * (x(k, j) - mu(j));
        v += (w - wbar) * (w - wbar);
      }
      var_sum += nn / ((nn - 1.0) * (nn - 1.0) * (nn - 1.0)) * v;
      const double t = s(i, j) - (i == j ? nu : 0.0);
      target += t * t;
    }
  return target > 0.0 ? std::clamp(var_sum / target, 0.0, 1.0) : 0.0;
}

double t_of(const std::vector<double> &d) {
  double m = 0.0;
  for (double v : d)
    m += v;
  m /= static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d)
    ss += (v - m) * (v - m);
  return m / std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
}

double exhaustive_sign_flip_p(const std::vector<double> &d) {
  const double t_obs = std::abs(t_of(d));
  const std::size_t n = d.size(), total = std::size_t{1} << n;
  std::size_t count = 0;
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
      s[i] = (mask >> i) & 1U ? -d[i] : d[i];
    count += std::abs(t_of(s)) >= t_obs * (1.0 - 1e-12) ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(VIDEC_CLI) + " -q " + args + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// synth -> preprocess -> evaluate -> stats under `root` with default settings.
void end_to_end(const fs::path &root) {
  const auto q = [](const fs::path &p) { return "'" + p.string() + "'"; };
  if (run_cli("--seed 1 synth --out " + q(root / "ds")) != 0)
    throw std::runtime_error("synth failed");
  if (run_cli("--seed 1 preprocess --in " + q(root / "ds") + " --out " + q(root / "ep")) != 0)
    throw std::runtime_error("preprocess failed");
  if (run_cli("--seed 1 evaluate --name S1 --in " + q(root / "ep") + " --out " + q(root / "res")) != 0)
    throw std::runtime_error("evaluate failed");
  if (run_cli("--seed 1 stats --in " + q(root / "res") + " --out " + q(root / "stats")) != 0)
    throw std::runtime_error("stats failed");
}

} // namespace

int main() {
  const auto scratch = fs::temp_directory_path() / ("videc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const TimeWindow early{0.0, 1.0}, late{1.0, 2.0};
  std::optional<EpochSet> seed1;
  double seed1_seconds = 0.0;
  auto get_seed1 = [&]() -> const EpochSet & {
    if (!seed1) {
      const auto t0 = std::chrono::steady_clock::now();
      seed1 = default_epochs(1);
      seed1_seconds = seconds_since(t0);
    }
    return *seed1;
  };

  guarded(1, "chance-level control", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto &e = get_seed1();
    auto labels = e.labels();
    auto rng = make_rng(1, {0x7065726dULL});
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto r = run_cell(relabel(e, labels), "all64", early, 1);
    const double secs = seconds_since(t0);
    const bool ok = r.mean_accuracy >= kChanceLo && r.mean_accuracy <= kChanceHi && secs < kChanceMaxSeconds;
    return Outcome{ok, fmt("permuted labels, all64 0-1 s, 10-fold: %.1f%% (required %.1f-%.1f%%), %.0f s (< %.0f s)",
                           100.0 * r.mean_accuracy, 100.0 * kChanceLo, 100.0 * kChanceHi, secs, kChanceMaxSeconds)};
  });

  guarded(2, "prefrontal interval effect", [&] {
    const auto &e = get_seed1();
    const auto pf_early = run_cell(e, "prefrontal9", early, 1), pf_late = run_cell(e, "prefrontal9", late, 1);
    const auto vis_early = run_cell(e, "visual9", early, 1), vis_late = run_cell(e, "visual9", late, 1);
    const auto pf = compare(pf_early, pf_late, 1), vis = compare(vis_early, vis_late, 1);
    int held = pf_early.mean_accuracy > pf_late.mean_accuracy ? 1 : 0;
    std::string per_seed = held ? "+" : "-";
    for (int s = 2; s <= kDirectionSeeds; ++s) {
      const auto es = default_epochs(static_cast<std::uint64_t>(s));
      const bool dir = run_cell(es, "prefrontal9", early, static_cast<std::uint64_t>(s)).mean_accuracy >
                       run_cell(es, "prefrontal9", late, static_cast<std::uint64_t>(s)).mean_accuracy;
      held += dir ? 1 : 0;
      per_seed += dir ? "+" : "-";
    }
    const bool ok = pf_early.mean_accuracy > pf_late.mean_accuracy && pf.p_value < kAlpha && vis.p_value > kAlpha &&
                    held >= kDirectionMinHeld;
    return Outcome{ok, fmt("prefrontal9 0-1 s %.1f%% vs 1-2 s %.1f%%, t = %.2f, p = %.4f (< %.2f); visual9 %.1f%% vs "
                           "%.1f%%, p = %.4f (> %.2f); direction held on %d/%d seeds [%s] (>= %d)",
                           100.0 * pf_early.mean_accuracy, 100.0 * pf_late.mean_accuracy, pf.t_statistic, pf.p_value,
                           kAlpha, 100.0 * vis_early.mean_accuracy, 100.0 * vis_late.mean_accuracy, vis.p_value, kAlpha,
                           held, kDirectionSeeds, per_seed.c_str(), kDirectionMinHeld)};
  });

  guarded(3, "prefrontal above visual in 0-1 s", [&] {
    const auto &e = get_seed1();
    const auto pf = run_cell(e, "prefrontal9", early, 1), vis = run_cell(e, "visual9", early, 1);
    const auto r = compare(pf, vis, 1);
    const bool ok = pf.mean_accuracy > vis.mean_accuracy && r.p_value < kAlpha;
    return Outcome{ok, fmt("prefrontal9 %.1f%% vs visual9 %.1f%%, t = %.2f, p = %.4f (< %.2f)",
                           100.0 * pf.mean_accuracy, 100.0 * vis.mean_accuracy, r.t_statistic, r.p_value, kAlpha)};
  });

  guarded(4, "CSP correctness", [&] {
    auto rng = make_rng(4, {0x637370ULL});
    std::uniform_int_distribution<Eigen::Index> dim(2, 64);
    double worst_id = 0.0, worst_off = 0.0, worst_pair = 0.0;
    for (int i = 0; i < kCspPairs; ++i) {
      const Eigen::Index d = i < 8 ? 64 : dim(rng);
      const auto c1 = random_spd(d, rng), c2 = random_spd(d, rng);
      const auto s = csp_spectrum(c1, c2), swapped = csp_spectrum(c2, c1);
      const Eigen::MatrixXd b = s.filters.transpose() * (c1 + c2) * s.filters;
      Eigen::MatrixXd a = s.filters.transpose() * c1 * s.filters;
      a.diagonal().setZero();
      worst_id = std::max(worst_id, (b - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
      worst_off = std::max(worst_off, a.cwiseAbs().maxCoeff());
      for (Eigen::Index k = 0; k < d; ++k)
        worst_pair = std::max(worst_pair, std::abs(s.eigenvalues(k) - (1.0 - swapped.eigenvalues(d - 1 - k))));
    }
    const bool ok = worst_id < kCspResidual && worst_off < kCspResidual && worst_pair < kCspPairing;
    return Outcome{ok, fmt("%d SPD pairs, d in [2, 64]: max |W'(C1+C2)W - I| = %.2e, max offdiag |W'C1W| = %.2e "
                           "(< %.0e); max pairing error = %.2e (< %.0e)",
                           kCspPairs, worst_id, worst_off, kCspResidual, worst_pair, kCspPairing)};
  });

  guarded(5, "feature dimensions", [&] {
    const auto &e = get_seed1();
    PipelineConfig all;
    all.m = 3;
    const auto f64 = ovr_csp_fit(prepare_cell(e, all), 3);
    PipelineConfig pf;
    pf.channels = default_prefrontal_group();
    const auto cell9 = prepare_cell(e, pf);
    const auto f9 = ovr_csp_fit(cell9, 1);
    const auto x64 = csp_feature_matrix(prepare_cell(e, all), f64).cols();
    const auto x9 = csp_feature_matrix(cell9, f9).cols();
    const bool ok = x64 == 36 && x9 == 12 && f64.channel_names.size() == 64 && f9.channel_names.size() == 9;
    return Outcome{ok, fmt("64 channels, m = 3: %ld features (36); 9 channels, m = 1: %ld features (12)",
                           static_cast<long>(x64), static_cast<long>(x9))};
  });

  guarded(6, "band-pass filter design", [&] {
    const auto c = design_butterworth_bandpass(5, 1.0, 100.0, 256.0);
    const double lo = 20.0 * std::log10(c.magnitude(1.0)), hi = 20.0 * std::log10(c.magnitude(100.0));
    const double dc = 20.0 * std::log10(std::max(c.magnitude(0.0), 1e-300));
    const double nyq = 20.0 * std::log10(std::max(c.magnitude(128.0), 1e-300));
    bool stable = true;
    for (const auto &s : c.sections)
      stable = stable && s.stable();
    const bool ok = std::abs(lo - kEdgeDb) <= kEdgeTolDb && std::abs(hi - kEdgeDb) <= kEdgeTolDb && dc < kRejectDb &&
                    nyq < kRejectDb && stable;
    return Outcome{ok, fmt("|H(1 Hz)| = %.3f dB, |H(100 Hz)| = %.3f dB (-3.01 +- %.1f); DC %.0f dB, Nyquist %.0f dB "
                           "(< %.0f); %zu sections %s",
                           lo, hi, kEdgeTolDb, dc, nyq, kRejectDb, c.sections.size(), stable ? "stable" : "UNSTABLE")};
  });

  guarded(7, "shrinkage correctness", [&] {
    auto rng = make_rng(7, {0x67616dULL});
    std::uniform_int_distribution<int> dn(2, 60), dd(1, 20);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    bool in_range = true;
    for (int i = 0; i < kGammaFixtures; ++i) {
      Eigen::MatrixXd x(dn(rng), dd(rng));
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
          x(r, c) = normal(rng) * (1.0 + static_cast<double>(c));
      const auto sh = shrinkage_gamma(x, x.colwise().mean().transpose());
      worst = std::max(worst, std::abs(sh.gamma - gamma_by_hand(x)));
      in_range = in_range && sh.gamma >= 0.0 && sh.gamma <= 1.0;
    }
    // RLDA on 6 classes x 90 samples in 36 dimensions.
    Eigen::MatrixXd feats(540, 36);
    std::vector<std::size_t> y;
    for (Eigen::Index i = 0; i < 540; ++i) {
      y.push_back(static_cast<std::size_t>(i % 6));
      for (Eigen::Index j = 0; j < 36; ++j)
        feats(i, j) = normal(rng) + (j % 6 == i % 6 ? 1.0 : 0.0);
    }
    const auto m = fit_rlda(feats, y, {"a", "b", "c", "d", "e", "f"});
    double residual = 0.0;
    for (Eigen::Index k = 0; k < 6; ++k)
      residual =
          std::max(residual, (m.covariance * m.weights.row(k).transpose() - m.class_means.row(k).transpose()).norm());
    const bool ok = worst < kGammaTol && in_range && m.gamma >= 0.0 && m.gamma <= 1.0 && residual < kSolveResidual;
    return Outcome{ok, fmt("%d fixtures: max |gamma - transcription| = %.2e (< %.0e), gamma in [0, 1]: %s; "
                           "RLDA gamma = %.3f, solve residual = %.2e (< %.0e)",
                           kGammaFixtures, worst, kGammaTol, in_range ? "yes" : "NO", m.gamma, residual,
                           kSolveResidual)};
  });

  guarded(8, "bootstrap calibration", [&] {
    auto rng = make_rng(8, {0x6e756c6cULL});
    std::normal_distribution<double> normal(0.25, 0.05);
    int rejections = 0;
    for (int i = 0; i < kNullTests; ++i) {
      std::vector<double> a(10), b(10);
      for (auto &v : a)
        v = normal(rng);
      for (auto &v : b)
        v = normal(rng);
      BootstrapOptions opt;
      opt.seed = static_cast<std::uint64_t>(i);
      rejections += bootstrap_test(a, b, opt).p_value < kAlpha ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / kNullTests;
    const std::vector<std::vector<double>> fixtures{{0.31, 0.12, 0.22, -0.05, 0.18, 0.09},
                                                    {0.4, -0.1, 0.05, 0.2, -0.15, 0.3},
                                                    {0.05, 0.1, 0.02, 0.08, -0.01, 0.12, 0.04, 0.07}};
    double worst = 0.0;
    for (const auto &d : fixtures) {
      const std::vector<double> zeros(d.size(), 0.0);
      BootstrapOptions opt;
      opt.seed = 8;
      worst = std::max(worst, std::abs(bootstrap_test(d, zeros, opt).p_value - exhaustive_sign_flip_p(d)));
    }
    const bool ok = rate >= kNullLo && rate <= kNullHi && worst <= kSignFlipTol;
    return Outcome{ok, fmt("null rejection at alpha 0.05 over %d paired tests (n = 10): %.1f%% (required %.0f-%.0f%%); "
                           "max |p - exhaustive sign-flip p| = %.4f (<= %.2f)",
                           kNullTests, 100.0 * rate, 100.0 * kNullLo, 100.0 * kNullHi, worst, kSignFlipTol)};
  });

  seed1.reset();

  guarded(9, "end-to-end determinism", [&] {
    const auto a = scratch / "run_a", b = scratch / "run_b";
    end_to_end(a);
    end_to_end(b);
    const auto da = tree_digest(a), db = tree_digest(b);
    const auto files = tree_files(a).size();
    return Outcome{da == db && files == tree_files(b).size(),
                   fmt("synth, preprocess, evaluate, stats twice with seed 1: %zu files, digests %s / %s", files,
                       da.c_str(), db.c_str())};
  });

  guarded(10, "report format", [&] {
    const auto text = read_file(scratch / "run_a" / "res" / "report.txt");
    std::istringstream in(text);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
      lines.push_back(line);
    const std::regex title(R"(Table \d+\. Classification accuracy \(%\), group \S+ \(m = \d\))");
    const std::regex header(R"(Dataset +0 - 1 s +1 - 2 s)");
    const std::regex row(R"(\S+ +\d{1,3}\.\d \xC2\xB1 \d{1,3}\.\d +\d{1,3}\.\d \xC2\xB1 \d{1,3}\.\d)");
    int tables = 0, rows = 0, bad = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!std::regex_match(lines[i], title))
        continue;
      ++tables;
      if (i + 3 >= lines.size() || !std::regex_match(lines[i + 1], header)) {
        ++bad;
        continue;
      }
      for (std::size_t j = i + 2; j < lines.size() && !lines[j].empty(); ++j) {
        ++rows;
        bad += std::regex_match(lines[j], row) ? 0 : 1;
      }
      bad += lines[i + 2].rfind("S1", 0) == 0 && lines[i + 3].rfind("Average", 0) == 0 ? 0 : 1;
    }
    const bool ok = tables == 3 && rows == 6 && bad == 0;
    return Outcome{ok, fmt("%d tables (3), %d rows (dataset + Average per table), %d malformed lines; columns "
                           "\"0 - 1 s\" / \"1 - 2 s\", cells \"mean \xC2\xB1 std\" with one decimal",
                           tables, rows, bad)};
  });

  std::error_code ec;
  fs::remove_all(scratch, ec);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
