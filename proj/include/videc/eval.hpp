#ifndef VIDEC_EVAL_HPP
#define VIDEC_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "videc/classify.hpp"
#include "videc/dataset.hpp"
#include "videc/hash.hpp"
#include "videc/preprocess.hpp"
#include "videc/random.hpp"
#include "videc/spatial.hpp"

namespace videc {

using Fold = std::vector<std::size_t>;

/// k disjoint test sets covering every index; deterministic given seed.
///
/// Stratified mode shuffles each class and deals its members round-robin,
/// carrying the dealing position across classes, so per-class and total fold
/// sizes differ by at most one.
inline std::vector<Fold> kfold_split(std::span<const std::size_t> labels, std::size_t k, std::uint64_t seed,
                                     bool stratified = true) {
  const std::size_t n = labels.size();
  if (k < 2)
    throw ConfigError("kfold_split: k must be >= 2");
  if (k > n)
    throw ConfigError("kfold_split: k=" + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  auto rng = make_rng(seed, {0x6b666f6c64ULL});
  std::vector<Fold> folds(k);
  if (stratified) {
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i)
      by_class[labels[i]].push_back(i);
    std::size_t pos = 0;
    for (auto &[cls, members] : by_class) {
      if (members.size() < k)
        throw ConfigError("kfold_split: class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                          " samples, fewer than k=" + std::to_string(k));
      std::shuffle(members.begin(), members.end(), rng);
      for (auto i : members)
        folds[pos++ % k].push_back(i);
    }
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    for (std::size_t j = 0; j < n; ++j)
      folds[j % k].push_back(all[j]);
  }
  for (auto &f : folds)
    std::sort(f.begin(), f.end());
  return folds;
}

/// `repeats` independent stratified splits holding out `test_fraction` of each class.
inline std::vector<Fold> monte_carlo_split(std::span<const std::size_t> labels, std::size_t repeats,
                                           std::uint64_t seed, double test_fraction = 0.1) {
  if (repeats < 1)
    throw ConfigError("monte_carlo_split: need at least one repeat");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("monte_carlo_split: test fraction must be in (0, 1)");
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);
  std::vector<Fold> out;
  for (std::size_t r = 0; r < repeats; ++r) {
    auto rng = make_rng(seed, {0x6d6363765ULL, r});
    Fold test;
    for (auto &[cls, members] : by_class) {
      auto shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto take = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(shuffled.size()))));
      if (take >= shuffled.size())
        throw ConfigError("monte_carlo_split: class " + std::to_string(cls) + " too small for a held-out split");
      test.insert(test.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(test.begin(), test.end());
    out.push_back(std::move(test));
  }
  return out;
}

using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Entry (i, j) counts true class i predicted as class j, rows in class_set order.
inline ConfusionMatrix confusion_matrix(std::span<const std::string> preds, std::span<const std::string> truths,
                                        const std::vector<std::string> &class_set) {
  if (preds.size() != truths.size())
    throw ConfigError("confusion_matrix: prediction and truth lengths differ");
  std::map<std::string, Eigen::Index> idx;
  for (std::size_t k = 0; k < class_set.size(); ++k)
    idx[class_set[k]] = static_cast<Eigen::Index>(k);
  const auto K = static_cast<Eigen::Index>(class_set.size());
  ConfusionMatrix c = ConfusionMatrix::Zero(K, K);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto t = idx.find(truths[i]);
    auto p = idx.find(preds[i]);
    if (t == idx.end() || p == idx.end())
      throw ConfigError("confusion_matrix: label '" + (t == idx.end() ? truths[i] : preds[i]) +
                        "' outside the class set");
    ++c(t->second, p->second);
  }
  return c;
}

struct TprStats {
  std::vector<double> tpr_percent;
  double max = 0.0;
  double min = 0.0;
  double gap = 0.0;
  double std = 0.0; // population standard deviation over classes
};

inline TprStats tpr_stats(const ConfusionMatrix &c) {
  if (c.rows() == 0 || c.rows() != c.cols())
    throw ConfigError("tpr_stats: confusion matrix must be square and non-empty");
  TprStats s;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const auto row = c.row(i).sum();
    if (row <= 0)
      throw ConfigError("tpr_stats: class row " + std::to_string(i) + " has no samples");
    s.tpr_percent.push_back(100.0 * static_cast<double>(c(i, i)) / static_cast<double>(row));
  }
  const auto [mn, mx] = std::minmax_element(s.tpr_percent.begin(), s.tpr_percent.end());
  s.min = *mn;
  s.max = *mx;
  s.gap = s.max - s.min;
  const double mean = std::accumulate(s.tpr_percent.begin(), s.tpr_percent.end(), 0.0) /
                      static_cast<double>(s.tpr_percent.size());
  double ss = 0.0;
  for (double v : s.tpr_percent)
    ss += (v - mean) * (v - mean);
  s.std = std::sqrt(ss / static_cast<double>(s.tpr_percent.size()));
  return s;
}

enum class CvMode { kfold, monte_carlo };

inline std::string to_string(CvMode m) { return m == CvMode::kfold ? "kfold" : "monte_carlo"; }

inline CvMode parse_cv_mode(const std::string &s) {
  if (s == "kfold" || s == "stratified")
    return CvMode::kfold;
  if (s == "monte_carlo" || s == "monte-carlo")
    return CvMode::monte_carlo;
  throw ConfigError("unknown cv mode '" + s + "' (expected kfold or monte_carlo)");
}

/// One grid cell: time interval x channel group x CSP size x classifier.
struct PipelineConfig {
  std::string group = "all";
  std::vector<std::string> channels; // empty: every channel of the epoch set
  TimeWindow interval{0.0, 1.0};
  int m = 3;
  CspOptions csp;
  RldaOptions rlda;
};

struct CvConfig {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  CvMode mode = CvMode::kfold;
  bool stratified = true;
  double test_fraction = 0.1;
  bool keep_models = false;
};

struct FoldModel {
  OvrCspModel csp;
  RldaModel rlda;
};

struct CvResult {
  std::vector<std::string> class_set;
  std::vector<double> fold_accuracies;
  std::vector<std::size_t> fold_test_counts;
  std::vector<std::size_t> fold_correct;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0; // sample standard deviation over folds
  ConfusionMatrix confusion;
  std::string config_fingerprint;
  std::vector<FoldModel> fold_models;
};

inline double mean_of(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample (n - 1) standard deviation; 0 for fewer than two values.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2)
    return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x)
    ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Canonical text of a pipeline + CV configuration (input to the fingerprint).
inline std::string canonical_config(const PipelineConfig &p, const CvConfig &cv) {
  std::string s = "group=" + p.group + ";channels=";
  for (const auto &c : p.channels)
    s += c + ",";
  char buf[256];
  std::snprintf(buf, sizeof buf, ";interval=%.17g,%.17g;m=%d;ridge=%d;gamma=%.17g;k=%zu;seed=%llu;mode=%s;strat=%d;tf=%.17g",
                p.interval.start, p.interval.end, p.m, p.csp.ridge_guard ? 1 : 0, p.rlda.fixed_gamma, cv.k,
                static_cast<unsigned long long>(cv.seed), to_string(cv.mode).c_str(), cv.stratified ? 1 : 0,
                cv.test_fraction);
  return s + buf;
}

/// Fits CSP then RLDA on the training trials only, from precomputed covariances.
inline FoldModel fit_fold(std::span<const Eigen::MatrixXd> covs, std::span<const std::size_t> label_idx,
                          std::span<const std::size_t> train, const std::vector<std::string> &class_set,
                          const std::vector<std::string> &channel_names, const PipelineConfig &p) {
  auto csp = ovr_csp_fit(covs, label_idx, train, class_set, channel_names, p.m, p.csp);
  Eigen::MatrixXd feats(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(csp.n_features()));
  std::vector<std::size_t> y;
  y.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    feats.row(static_cast<Eigen::Index>(i)) = csp_features_from_covariance(covs[train[i]], csp).transpose();
    y.push_back(label_idx[train[i]]);
  }
  auto rlda = fit_rlda(feats, y, class_set, p.rlda);
  return {std::move(csp), std::move(rlda)};
}

/// Same fit reading only the training trials of an (already cropped/selected) epoch set.
inline FoldModel fit_fold(const EpochSet &e, std::span<const std::size_t> train, const PipelineConfig &p) {
  std::vector<Eigen::MatrixXd> covs(e.n_trials());
  for (auto t : train)
    covs[t] = trial_covariance(e.trial(t));
  return fit_fold(covs, e.label_indices(), train, e.class_set(), e.channel_names(), p);
}

/// Selects the channel group and crops the interval of a baseline-corrected epoch set.
inline EpochSet prepare_cell(const EpochSet &e, const PipelineConfig &p) {
  const EpochSet sel = p.channels.empty() ? e : select_channels(e, p.channels);
  return crop_interval(sel, p.interval.start, p.interval.end);
}

/// Cross-validated accuracy of one pipeline cell. CSP and RLDA see training folds only.
inline CvResult cross_validate(const EpochSet &e, const PipelineConfig &p, const CvConfig &cv) {
  const EpochSet cell = prepare_cell(e, p);
  const auto covs = trial_covariances(cell);
  const auto label_idx = cell.label_indices();
  const auto folds = cv.mode == CvMode::kfold ? kfold_split(label_idx, cv.k, cv.seed, cv.stratified)
                                              : monte_carlo_split(label_idx, cv.k, cv.seed, cv.test_fraction);
  const auto K = static_cast<Eigen::Index>(cell.class_set().size());

  CvResult r;
  r.class_set = cell.class_set();
  r.confusion = ConfusionMatrix::Zero(K, K);
  r.config_fingerprint = fnv1a_hex(canonical_config(p, cv));
  for (const auto &test : folds) {
    std::vector<bool> is_test(cell.n_trials(), false);
    for (auto t : test)
      is_test[t] = true;
    std::vector<std::size_t> train;
    for (std::size_t t = 0; t < cell.n_trials(); ++t)
      if (!is_test[t])
        train.push_back(t);
    auto model = fit_fold(covs, label_idx, train, cell.class_set(), cell.channel_names(), p);
    std::size_t correct = 0;
    for (auto t : test) {
      const auto f = csp_features_from_covariance(covs[t], model.csp);
      const auto pred = predict(model.rlda, f).label_index;
      ++r.confusion(static_cast<Eigen::Index>(label_idx[t]), static_cast<Eigen::Index>(pred));
      correct += pred == label_idx[t] ? 1 : 0;
    }
    r.fold_test_counts.push_back(test.size());
    r.fold_correct.push_back(correct);
    r.fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    if (cv.keep_models)
      r.fold_models.push_back(std::move(model));
  }
  r.mean_accuracy = mean_of(r.fold_accuracies);
  r.std_accuracy = sample_std(r.fold_accuracies);
  return r;
}

} // namespace videc

#endif // VIDEC_EVAL_HPP
