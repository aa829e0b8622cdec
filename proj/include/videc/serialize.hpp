#ifndef VIDEC_SERIALIZE_HPP
#define VIDEC_SERIALIZE_HPP

// JSON and CSV exports of models and results.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "videc/classify.hpp"
#include "videc/dataset.hpp"
#include "videc/eval.hpp"
#include "videc/filter.hpp"
#include "videc/spatial.hpp"
#include "videc/stats.hpp"
#include "videc/synth.hpp"

namespace videc {

using nlohmann::json;

inline json matrix_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Eigen::VectorXd &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v(i));
  return out;
}

inline Eigen::MatrixXd matrix_from_json(const json &j) {
  if (!j.is_array())
    throw DataError(DataError::Kind::malformed, "expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto &r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw DataError(DataError::Kind::malformed, "ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = r[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const json &j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json to_json(const FilterCoefficients &c) {
  json sections = json::array();
  for (const auto &s : c.sections)
    sections.push_back({{"b", s.b}, {"a", s.a}});
  return {{"order", c.design.order},
          {"low_hz", c.design.low_hz},
          {"high_hz", c.design.high_hz},
          {"fs", c.design.fs},
          {"sections", sections}};
}

inline json to_json(const OvrCspModel &m) {
  json banks = json::array();
  for (std::size_t k = 0; k < m.banks.size(); ++k) {
    const auto &b = m.banks[k];
    banks.push_back({{"class", m.class_set[k]},
                     {"eigenvalues", vector_json(b.eigenvalues)},
                     {"filters", matrix_json(b.filters)},
                     {"class_covariance", matrix_json(b.class_cov)},
                     {"rest_covariance", matrix_json(b.rest_cov)}});
  }
  return {{"class_set", m.class_set},
          {"channel_names", m.channel_names},
          {"m", m.m_per_side},
          {"feature", "log(w^T C w), C trace-normalized"},
          {"banks", banks}};
}

inline OvrCspModel ovr_csp_from_json(const json &j) {
  try {
    OvrCspModel m;
    m.class_set = j.at("class_set").get<std::vector<std::string>>();
    m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    m.m_per_side = j.at("m").get<int>();
    for (const auto &b : j.at("banks"))
      m.banks.push_back({matrix_from_json(b.at("filters")), vector_from_json(b.at("eigenvalues")),
                         matrix_from_json(b.at("class_covariance")), matrix_from_json(b.at("rest_covariance"))});
    if (m.banks.size() != m.class_set.size())
      throw DataError(DataError::Kind::malformed, "CSP model: bank count differs from class count");
    return m;
  } catch (const json::exception &e) {
    throw DataError(DataError::Kind::malformed, std::string("CSP model JSON: ") + e.what());
  }
}

inline json to_json(const RldaModel &m) {
  return {{"class_set", m.class_set},
          {"class_means", matrix_json(m.class_means)},
          {"covariance", matrix_json(m.covariance)},
          {"priors", vector_json(m.priors)},
          {"gamma", m.gamma},
          {"nu", m.nu},
          {"weights", matrix_json(m.weights)},
          {"biases", vector_json(m.biases)},
          {"covariance_scheme", "pooled_then_shrink"}};
}

inline RldaModel rlda_from_json(const json &j) {
  try {
    RldaModel m;
    m.class_set = j.at("class_set").get<std::vector<std::string>>();
    m.class_means = matrix_from_json(j.at("class_means"));
    m.covariance = matrix_from_json(j.at("covariance"));
    m.priors = vector_from_json(j.at("priors"));
    m.gamma = j.at("gamma").get<double>();
    m.nu = j.at("nu").get<double>();
    m.weights = matrix_from_json(j.at("weights"));
    m.biases = vector_from_json(j.at("biases"));
    return m;
  } catch (const json::exception &e) {
    throw DataError(DataError::Kind::malformed, std::string("RLDA model JSON: ") + e.what());
  }
}

inline json confusion_json(const ConfusionMatrix &c) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      row.push_back(c(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const CvResult &r) {
  json j = {{"class_set", r.class_set},
            {"fold_accuracies", r.fold_accuracies},
            {"fold_test_counts", r.fold_test_counts},
            {"fold_correct", r.fold_correct},
            {"mean_accuracy", r.mean_accuracy},
            {"std_accuracy", r.std_accuracy},
            {"confusion", confusion_json(r.confusion)},
            {"config_fingerprint", r.config_fingerprint}};
  const auto t = tpr_stats(r.confusion);
  j["tpr"] = {{"per_class_percent", t.tpr_percent}, {"max", t.max}, {"min", t.min}, {"gap", t.gap}, {"std", t.std}};
  if (!r.fold_models.empty()) {
    json models = json::array();
    for (const auto &fm : r.fold_models)
      models.push_back({{"csp", to_json(fm.csp)}, {"rlda", to_json(fm.rlda)}});
    j["fold_models"] = models;
  }
  return j;
}

inline CvResult cv_result_from_json(const json &j) {
  try {
    CvResult r;
    r.class_set = j.at("class_set").get<std::vector<std::string>>();
    r.fold_accuracies = j.at("fold_accuracies").get<std::vector<double>>();
    r.fold_test_counts = j.at("fold_test_counts").get<std::vector<std::size_t>>();
    r.fold_correct = j.at("fold_correct").get<std::vector<std::size_t>>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    const auto &c = j.at("confusion");
    const auto K = static_cast<Eigen::Index>(c.size());
    r.confusion = ConfusionMatrix::Zero(K, K);
    for (Eigen::Index a = 0; a < K; ++a)
      for (Eigen::Index b = 0; b < K; ++b)
        r.confusion(a, b) = c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get<std::int64_t>();
    return r;
  } catch (const json::exception &e) {
    throw DataError(DataError::Kind::malformed, std::string("CV result JSON: ") + e.what());
  }
}

inline json to_json(const StatTestResult &r) {
  return {{"t_statistic", std::isfinite(r.t_statistic) ? json(r.t_statistic) : json(r.t_statistic > 0 ? "inf" : "-inf")},
          {"p_value", r.p_value},
          {"n_resamples", r.n_resamples},
          {"seed", r.seed},
          {"alpha", r.alpha},
          {"significant", r.significant()},
          {"paired", r.paired},
          {"paired_scheme", to_string(r.paired_scheme)},
          {"sidedness", to_string(r.sidedness)},
          {"mean_difference", r.mean_difference},
          {"n_a", r.n_a},
          {"n_b", r.n_b},
          {"degenerate", r.degenerate}};
}

inline json to_json(const GroundTruth &g) {
  json sources = json::array();
  for (const auto &s : g.sources) {
    json support = json::object();
    for (Eigen::Index c = 0; c < s.projection.size(); ++c)
      if (s.projection(c) != 0.0)
        support[g.channel_names[static_cast<std::size_t>(c)]] = s.projection(c);
    sources.push_back({{"class", s.label},
                       {"region", s.region},
                       {"frequency_hz", s.frequency_hz},
                       {"gain_early", s.gain_early},
                       {"gain_late", s.gain_late},
                       {"support", support}});
  }
  return {{"class_set", g.class_set},
          {"channel_names", g.channel_names},
          {"snr_db", std::isfinite(g.snr_db) ? json(g.snr_db) : json("-inf")},
          {"source_rms_uv", g.source_rms_uv},
          {"sources", sources}};
}

namespace detail {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// fold,n_test,n_correct,accuracy
inline std::string folds_csv(const CvResult &r) {
  std::string out = "fold,n_test,n_correct,accuracy\n";
  for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f)
    out += std::to_string(f) + "," + std::to_string(r.fold_test_counts[f]) + "," + std::to_string(r.fold_correct[f]) +
           "," + detail::fmt_g(r.fold_accuracies[f]) + "\n";
  return out;
}

/// Square table, header `true\predicted,<labels...>`, one row per true class.
inline std::string confusion_csv(const CvResult &r) {
  std::string out = "true\\predicted";
  for (const auto &c : r.class_set)
    out += "," + c;
  out += "\n";
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    out += r.class_set[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j)
      out += "," + std::to_string(r.confusion(i, j));
    out += "\n";
  }
  return out;
}

/// channel,x,y,<column names...>: one row per channel, plot-ready.
inline std::string weights_csv(const Eigen::MatrixXd &w, const std::vector<std::string> &channels,
                               const std::vector<Point2> &positions, const std::string &prefix) {
  if (static_cast<std::size_t>(w.rows()) != channels.size())
    throw ConfigError("weights_csv: row count differs from channel count");
  std::string out = "channel,x,y";
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    out += "," + prefix + std::to_string(j);
  out += "\n";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const bool has_pos = c < positions.size();
    out += channels[c] + "," + (has_pos ? detail::fmt_g(positions[c].x) : "") + "," +
           (has_pos ? detail::fmt_g(positions[c].y) : "");
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      out += "," + detail::fmt_g(w(static_cast<Eigen::Index>(c), j));
    out += "\n";
  }
  return out;
}

} // namespace videc

#endif // VIDEC_SERIALIZE_HPP
