#ifndef VIDEC_CLASSIFY_HPP
#define VIDEC_CLASSIFY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "videc/error.hpp"

namespace videc {

struct Shrinkage {
  double gamma = 0.0;
  double nu = 0.0;
};

/// Analytic shrinkage intensity towards nu*I (Schafer-Strimmer form).
///
/// Rows of `samples` are observations. With z_k = x_k - mean, S the unbiased
/// sample covariance and W_k = z_k z_k^T (whose average is (n-1)/n S):
///
///   gamma = n/(n-1)^3 * sum_k ||W_k - mean(W)||_F^2 / ||S - nu I||_F^2,
///
/// clamped to [0, 1]; nu = trace(S)/d. gamma is 0 when S is already spherical.
inline Shrinkage shrinkage_gamma(const Eigen::Ref<const Eigen::MatrixXd> &samples,
                                 const Eigen::Ref<const Eigen::VectorXd> &mean) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2)
    throw ConfigError("shrinkage_gamma: need at least 2 samples");
  if (mean.size() != d)
    throw ConfigError("shrinkage_gamma: mean dimension mismatch");
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd z = samples.rowwise() - mean.transpose();
  const Eigen::MatrixXd s = z.transpose() * z / (nd - 1.0);
  const double nu = s.trace() / static_cast<double>(d);
  const double denom = (s - nu * Eigen::MatrixXd::Identity(d, d)).squaredNorm();
  if (!(denom > 0.0))
    return {0.0, nu};
  const Eigen::MatrixXd wbar = s * ((nd - 1.0) / nd);
  double spread = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd zk = z.row(k).transpose();
    spread += (zk * zk.transpose() - wbar).squaredNorm();
  }
  const double gamma = nd / ((nd - 1.0) * (nd - 1.0) * (nd - 1.0)) * spread / denom;
  return {std::clamp(gamma, 0.0, 1.0), nu};
}

/// Multiclass linear discriminant with a shared, shrunk covariance.
struct RldaModel {
  std::vector<std::string> class_set;
  Eigen::MatrixXd class_means;  // K x d, row k is mu_k
  Eigen::MatrixXd covariance;   // shrunk pooled covariance
  Eigen::VectorXd priors;       // empirical
  double gamma = 0.0;
  double nu = 0.0;
  Eigen::MatrixXd weights;      // K x d, row k solves covariance * w_k = mu_k
  Eigen::VectorXd biases;       // -1/2 mu_k^T w_k + log pi_k

  Eigen::Index dim() const noexcept { return class_means.cols(); }

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (x.size() != dim())
      throw ConfigError("rlda: feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(dim()));
    return weights * x + biases;
  }
};

struct RldaOptions {
  /// Fixed gamma in [0, 1]; negative selects the analytic intensity.
  double fixed_gamma = -1.0;
};

/// Fits shrinkage LDA on rows of `features` with class indices in [0, K).
inline RldaModel fit_rlda(const Eigen::Ref<const Eigen::MatrixXd> &features, std::span<const std::size_t> labels,
                          const std::vector<std::string> &class_set, const RldaOptions &opt = {}) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const auto K = static_cast<Eigen::Index>(class_set.size());
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ConfigError("fit_rlda: label count does not match sample count");
  if (K < 1 || d < 1)
    throw ConfigError("fit_rlda: empty class set or feature dimension");
  if (!features.allFinite())
    throw NumericalError("fit_rlda: non-finite features");

  RldaModel m;
  m.class_set = class_set;
  m.class_means = Eigen::MatrixXd::Zero(K, d);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    if (k >= K)
      throw ConfigError("fit_rlda: label index out of range");
    m.class_means.row(k) += features.row(i);
    counts(k) += 1.0;
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (counts(k) < 2.0)
      throw ConfigError("fit_rlda: class '" + class_set[static_cast<std::size_t>(k)] + "' has fewer than 2 samples");
    m.class_means.row(k) /= counts(k);
  }
  m.priors = counts / static_cast<double>(n);

  Eigen::MatrixXd residuals(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    residuals.row(i) = features.row(i) - m.class_means.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
  const Eigen::MatrixXd pooled = residuals.transpose() * residuals / static_cast<double>(n - K);

  const auto sh = shrinkage_gamma(residuals, Eigen::VectorXd::Zero(d));
  m.gamma = opt.fixed_gamma >= 0.0 ? std::min(opt.fixed_gamma, 1.0) : sh.gamma;
  m.nu = pooled.trace() / static_cast<double>(d);
  if (!(m.nu > 0.0))
    throw NumericalError("fit_rlda: degenerate features (zero within-class variance)");
  m.covariance = (1.0 - m.gamma) * pooled + m.gamma * m.nu * Eigen::MatrixXd::Identity(d, d);

  Eigen::LLT<Eigen::MatrixXd> llt(m.covariance);
  if (llt.info() != Eigen::Success)
    throw NumericalError("fit_rlda: shrunk covariance is not positive definite");
  m.weights = llt.solve(m.class_means.transpose()).transpose();
  m.biases.resize(K);
  for (Eigen::Index k = 0; k < K; ++k)
    m.biases(k) = -0.5 * m.class_means.row(k).dot(m.weights.row(k)) + std::log(m.priors(k));
  return m;
}

struct Prediction {
  std::size_t label_index = 0;
  std::string label;
  Eigen::VectorXd scores;
};

/// argmax of the discriminants; ties go to the earlier class.
inline Prediction predict(const RldaModel &model, const Eigen::Ref<const Eigen::VectorXd> &x) {
  Prediction p;
  p.scores = model.scores(x);
  for (Eigen::Index k = 1; k < p.scores.size(); ++k) {
    if (p.scores(k) > p.scores(static_cast<Eigen::Index>(p.label_index)))
      p.label_index = static_cast<std::size_t>(k);
  }
  p.label = model.class_set[p.label_index];
  return p;
}

inline std::vector<std::size_t> predict_batch(const RldaModel &model, const Eigen::Ref<const Eigen::MatrixXd> &x) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.push_back(predict(model, x.row(i).transpose()).label_index);
  return out;
}

} // namespace videc

#endif // VIDEC_CLASSIFY_HPP
