#ifndef VIDEC_SPATIAL_HPP
#define VIDEC_SPATIAL_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "videc/dataset.hpp"

namespace videc {

/// C = X X^T / trace(X X^T) for a channels x samples trial.
inline Eigen::MatrixXd trial_covariance(const Eigen::Ref<const RowMatrixXd> &trial) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(trial.rows(), trial.rows());
  c.selfadjointView<Eigen::Lower>().rankUpdate(trial);
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  const double tr = c.trace();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw NumericalError("trial_covariance: trial has zero (or non-finite) power");
  return c / tr;
}

/// Trace-normalized covariance of every trial.
inline std::vector<Eigen::MatrixXd> trial_covariances(const EpochSet &e) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(e.n_trials());
  for (std::size_t t = 0; t < e.n_trials(); ++t)
    out.push_back(trial_covariance(e.trial(t)));
  return out;
}

/// Mean trial covariance over trials with the given label.
inline Eigen::MatrixXd class_covariance(const EpochSet &e, const std::string &label) {
  if (std::find(e.class_set().begin(), e.class_set().end(), label) == e.class_set().end())
    throw ConfigError("class_covariance: unknown label '" + label + "'");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(e.n_channels()),
                                              static_cast<Eigen::Index>(e.n_channels()));
  std::size_t n = 0;
  for (std::size_t t = 0; t < e.n_trials(); ++t) {
    if (e.labels()[t] == label) {
      sum += trial_covariance(e.trial(t));
      ++n;
    }
  }
  if (n < 2)
    throw ConfigError("class_covariance: label '" + label + "' has " + std::to_string(n) + " trial(s); need >= 2");
  return sum / static_cast<double>(n);
}

struct CspOptions {
  /// Add eps*I (eps = 1e-10 * trace / d) when the composite's condition number
  /// exceeds `max_condition`, instead of failing.
  bool ridge_guard = false;
  double max_condition = 1e12;
};

/// Eigenvector sign convention: largest-magnitude component positive.
inline void canonicalize_signs(Eigen::MatrixXd &w) {
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Eigen::Index imax = 0;
    w.col(j).cwiseAbs().maxCoeff(&imax);
    if (w(imax, j) < 0.0)
      w.col(j) = -w.col(j);
  }
}

/// Full generalized spectrum of C1 w = lambda (C1 + C2) w via whitening.
/// Eigenvalues ascending; columns of `filters` satisfy W^T (C1 + C2) W = I.
struct CspSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd filters;
};

inline CspSpectrum csp_spectrum(const Eigen::MatrixXd &c1, const Eigen::MatrixXd &c2, const CspOptions &opt = {}) {
  if (c1.rows() != c1.cols() || c1.rows() != c2.rows() || c2.rows() != c2.cols() || c1.rows() == 0)
    throw ConfigError("csp: covariance matrices must be square and equally sized");
  const Eigen::Index d = c1.rows();
  Eigen::MatrixXd composite = c1 + c2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> comp(composite);
  if (comp.info() != Eigen::Success)
    throw NumericalError("csp: eigendecomposition of the composite covariance failed");
  double lo = comp.eigenvalues().minCoeff();
  const double hi = comp.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > opt.max_condition) {
    if (!opt.ridge_guard)
      throw NumericalError("csp: composite covariance is numerically singular (condition number " +
                           (lo > 0.0 ? std::to_string(hi / lo) : std::string("inf")) +
                           "); enable ridge regularization");
    composite += (1e-10 * composite.trace() / static_cast<double>(d)) * Eigen::MatrixXd::Identity(d, d);
    comp.compute(composite);
    lo = comp.eigenvalues().minCoeff();
    if (!(lo > 0.0))
      throw NumericalError("csp: composite covariance is not positive definite even after ridge");
  }
  // P = Lambda^{-1/2} U^T whitens the composite.
  const Eigen::MatrixXd p = comp.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            comp.eigenvectors().transpose();
  Eigen::MatrixXd s = p * c1 * p.transpose();
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> white(s);
  if (white.info() != Eigen::Success)
    throw NumericalError("csp: eigendecomposition of the whitened class covariance failed");
  CspSpectrum out{white.eigenvalues(), p.transpose() * white.eigenvectors()};
  canonicalize_signs(out.filters);
  return out;
}

struct CspResult {
  Eigen::MatrixXd filters;     // d x 2m: m largest-lambda columns, then m smallest
  Eigen::VectorXd eigenvalues; // 2m, descending
};

/// Binary CSP keeping the m largest and m smallest generalized eigenvalues.
inline CspResult csp_binary(const Eigen::MatrixXd &c1, const Eigen::MatrixXd &c2, int m, const CspOptions &opt = {}) {
  if (m < 1 || 2 * m > c1.rows())
    throw ConfigError("csp: need 1 <= m and 2m <= channels (m=" + std::to_string(m) +
                      ", channels=" + std::to_string(c1.rows()) + ")");
  const auto spec = csp_spectrum(c1, c2, opt);
  const Eigen::Index d = c1.rows();
  CspResult r{Eigen::MatrixXd(d, 2 * m), Eigen::VectorXd(2 * m)};
  for (int j = 0; j < m; ++j) {
    r.filters.col(j) = spec.filters.col(d - 1 - j);
    r.eigenvalues(j) = spec.eigenvalues(d - 1 - j);
  }
  for (int j = 0; j < m; ++j) {
    r.filters.col(m + j) = spec.filters.col(m - 1 - j);
    r.eigenvalues(m + j) = spec.eigenvalues(m - 1 - j);
  }
  return r;
}

/// A = C W (W^T C W)^{-1}: the scalp pattern of each filter column.
inline Eigen::MatrixXd spatial_patterns(const Eigen::MatrixXd &composite, const Eigen::MatrixXd &filters) {
  const Eigen::MatrixXd cw = composite * filters;
  const Eigen::MatrixXd gram = filters.transpose() * cw;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible())
    throw NumericalError("csp_patterns: W^T C W is singular");
  return (lu.solve(cw.transpose())).transpose();
}

struct CspBank {
  Eigen::MatrixXd filters;        // d x 2m
  Eigen::VectorXd eigenvalues;    // 2m, descending
  Eigen::MatrixXd class_cov;      // C_k
  Eigen::MatrixXd rest_cov;       // C_rest
};

/// One-versus-rest CSP: one binary bank per class against all other trials.
struct OvrCspModel {
  std::vector<std::string> class_set;
  std::vector<std::string> channel_names;
  int m_per_side = 0;
  std::vector<CspBank> banks;

  std::size_t n_features() const noexcept { return class_set.size() * 2 * static_cast<std::size_t>(m_per_side); }

  std::size_t class_index(const std::string &label) const {
    auto it = std::find(class_set.begin(), class_set.end(), label);
    if (it == class_set.end())
      throw ConfigError("unknown class '" + label + "'");
    return static_cast<std::size_t>(it - class_set.begin());
  }
};

/// Fits OVR-CSP from precomputed trial covariances restricted to `trials`.
///
/// C_k averages trials labelled k; C_rest averages all remaining trials pooled.
inline OvrCspModel ovr_csp_fit(std::span<const Eigen::MatrixXd> covs, std::span<const std::size_t> label_idx,
                               std::span<const std::size_t> trials, const std::vector<std::string> &class_set,
                               const std::vector<std::string> &channel_names, int m, const CspOptions &opt = {}) {
  const std::size_t K = class_set.size();
  if (K < 2)
    throw ConfigError("ovr_csp_fit: need at least 2 classes");
  if (covs.empty())
    throw ConfigError("ovr_csp_fit: no trials");
  const Eigen::Index d = covs.front().rows();
  std::vector<Eigen::MatrixXd> sums(K, Eigen::MatrixXd::Zero(d, d));
  std::vector<std::size_t> counts(K, 0);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (auto t : trials) {
    sums[label_idx[t]] += covs[t];
    ++counts[label_idx[t]];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] < 2)
      throw ConfigError("ovr_csp_fit: class '" + class_set[k] + "' has " + std::to_string(counts[k]) +
                        " training trial(s); need >= 2");
    total += sums[k];
  }
  OvrCspModel model{class_set, channel_names, m, {}};
  model.banks.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::MatrixXd ck = sums[k] / static_cast<double>(counts[k]);
    const Eigen::MatrixXd crest = (total - sums[k]) / static_cast<double>(trials.size() - counts[k]);
    auto r = csp_binary(ck, crest, m, opt);
    model.banks.push_back({std::move(r.filters), std::move(r.eigenvalues), ck, crest});
  }
  return model;
}

inline OvrCspModel ovr_csp_fit(const EpochSet &e, int m, const CspOptions &opt = {}) {
  const auto covs = trial_covariances(e);
  const auto idx = e.label_indices();
  std::vector<std::size_t> all(e.n_trials());
  for (std::size_t i = 0; i < all.size(); ++i)
    all[i] = i;
  return ovr_csp_fit(covs, idx, all, e.class_set(), e.channel_names(), m, opt);
}

/// log(w^T C w) for every filter of every bank, in class_set order.
inline Eigen::VectorXd csp_features_from_covariance(const Eigen::MatrixXd &cov, const OvrCspModel &model) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(model.n_features()));
  Eigen::Index j = 0;
  for (const auto &bank : model.banks) {
    const Eigen::MatrixXd cw = cov * bank.filters;
    for (Eigen::Index c = 0; c < bank.filters.cols(); ++c)
      f(j++) = std::log(bank.filters.col(c).dot(cw.col(c)));
  }
  return f;
}

inline Eigen::VectorXd csp_features(const Eigen::Ref<const RowMatrixXd> &trial, const OvrCspModel &model) {
  if (static_cast<std::size_t>(trial.rows()) != model.channel_names.size())
    throw ConfigError("csp_features: trial has " + std::to_string(trial.rows()) + " channels, model expects " +
                      std::to_string(model.channel_names.size()));
  return csp_features_from_covariance(trial_covariance(trial), model);
}

/// Feature matrix (trials x K*2m) for an epoch set whose channel order matches the model.
inline Eigen::MatrixXd csp_feature_matrix(const EpochSet &e, const OvrCspModel &model) {
  if (e.channel_names() != model.channel_names)
    throw ConfigError("csp_features: epoch channels do not match the model's channel order");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(e.n_trials()), static_cast<Eigen::Index>(model.n_features()));
  for (std::size_t t = 0; t < e.n_trials(); ++t)
    out.row(static_cast<Eigen::Index>(t)) = csp_features(e.trial(t), model).transpose();
  return out;
}

/// Patterns of one class bank, A = C W (W^T C W)^{-1} with C = C_k + C_rest.
inline Eigen::MatrixXd csp_patterns(const OvrCspModel &model, const std::string &label) {
  const auto &bank = model.banks.at(model.class_index(label));
  return spatial_patterns(bank.class_cov + bank.rest_cov, bank.filters);
}

} // namespace videc

#endif // VIDEC_SPATIAL_HPP
