#ifndef VIDEC_DATASET_HPP
#define VIDEC_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "videc/error.hpp"

namespace videc {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2 &, const Point2 &) = default;
};

/// Seconds to a sample offset. Rounds half away from zero so windows are
/// deterministic regardless of the sign of the offset.
inline std::int64_t seconds_to_samples(double seconds, double fs) {
  return static_cast<std::int64_t>(std::llround(seconds * fs));
}

namespace detail {

inline void require_unique_nonempty(const std::vector<std::string> &names, const char *what) {
  std::set<std::string> seen;
  for (const auto &n : names) {
    if (n.empty())
      throw ConfigError(std::string(what) + ": empty channel name");
    if (!seen.insert(n).second)
      throw ConfigError(std::string(what) + ": duplicate channel name '" + n + "'");
  }
}

} // namespace detail

/// Named electrode layout. Reference and ground electrodes are not data rows.
class Montage {
public:
  Montage() = default;

  Montage(std::vector<std::string> channel_names, std::vector<Point2> positions,
          std::string reference_name, std::string ground_name)
      : names_(std::move(channel_names)), positions_(std::move(positions)),
        reference_(std::move(reference_name)), ground_(std::move(ground_name)) {
    detail::require_unique_nonempty(names_, "montage");
    if (positions_.size() != names_.size())
      throw ConfigError("montage: " + std::to_string(positions_.size()) + " positions for " +
                        std::to_string(names_.size()) + " channels");
    for (const auto &n : names_) {
      if (n == reference_ || n == ground_)
        throw ConfigError("montage: reference/ground electrode '" + n + "' listed as a data channel");
    }
  }

  const std::vector<std::string> &channel_names() const noexcept { return names_; }
  const std::vector<Point2> &positions() const noexcept { return positions_; }
  const std::string &reference_name() const noexcept { return reference_; }
  const std::string &ground_name() const noexcept { return ground_; }
  std::size_t size() const noexcept { return names_.size(); }

  /// Index of a channel, or throws ConfigError naming it.
  std::size_t index_of(const std::string &name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
      throw ConfigError("unknown channel '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
  }

  friend bool operator==(const Montage &, const Montage &) = default;

private:
  std::vector<std::string> names_;
  std::vector<Point2> positions_;
  std::string reference_;
  std::string ground_;
};

struct Event {
  std::int64_t onset_sample = 0;
  std::string label;
  friend bool operator==(const Event &, const Event &) = default;
};

/// Continuous multichannel recording in microvolts, channels x samples.
///
/// Samples are held as float because that is the on-disk type; loading and
/// saving is therefore exact. Events are kept sorted by onset (stable).
class RawRecording {
public:
  RawRecording() = default;

  RawRecording(RowMatrixXf data, double fs, Montage montage, std::vector<Event> events)
      : data_(std::move(data)), fs_(fs), montage_(std::move(montage)), events_(std::move(events)) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_))
      throw ConfigError("recording: sampling rate must be positive and finite");
    if (static_cast<std::size_t>(data_.rows()) != montage_.size())
      throw DataError(DataError::Kind::dimension_mismatch,
                      "recording: " + std::to_string(data_.rows()) + " data rows but montage has " +
                          std::to_string(montage_.size()) + " channels");
    if (!data_.allFinite())
      throw DataError(DataError::Kind::non_finite, "recording: non-finite sample values");
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event &a, const Event &b) { return a.onset_sample < b.onset_sample; });
    for (const auto &e : events_) {
      if (e.onset_sample < 0 || e.onset_sample >= data_.cols())
        throw DataError(DataError::Kind::malformed,
                        "recording: event '" + e.label + "' at sample " + std::to_string(e.onset_sample) +
                            " outside [0, " + std::to_string(data_.cols()) + ")");
    }
  }

  const RowMatrixXf &data() const noexcept { return data_; }
  double fs() const noexcept { return fs_; }
  const Montage &montage() const noexcept { return montage_; }
  const std::vector<Event> &events() const noexcept { return events_; }
  std::size_t n_channels() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t n_samples() const noexcept { return static_cast<std::size_t>(data_.cols()); }

  /// Moves the sample matrix out, leaving the recording empty.
  RowMatrixXf take_data() && { return std::move(data_); }

  friend bool operator==(const RawRecording &a, const RawRecording &b) {
    return a.fs_ == b.fs_ && a.montage_ == b.montage_ && a.events_ == b.events_ &&
           a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           (a.data_.array() == b.data_.array()).all();
  }

private:
  RowMatrixXf data_;
  double fs_ = 1.0;
  Montage montage_;
  std::vector<Event> events_;
};

/// Trials x channels x samples tensor with per-trial labels.
///
/// Time axis: sample j of every trial sits at t0 + j / fs seconds relative to
/// the event onset. Positions are optional (empty, or one per channel).
class EpochSet {
public:
  struct Shape {
    std::size_t trials = 0;
    std::size_t channels = 0;
    std::size_t samples = 0;

    friend bool operator==(const Shape &, const Shape &) = default;
  };

  EpochSet() = default;

  EpochSet(std::vector<double> data, Shape shape, double fs, double t0, std::vector<std::string> labels,
           std::vector<std::string> channel_names, std::vector<std::string> class_set,
           std::vector<Point2> positions = {})
      : data_(std::move(data)), shape_(shape), fs_(fs), t0_(t0), labels_(std::move(labels)),
        channel_names_(std::move(channel_names)), class_set_(std::move(class_set)),
        positions_(std::move(positions)) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_) || !std::isfinite(t0_))
      throw ConfigError("epochs: sampling rate must be positive and t0 finite");
    if (data_.size() != shape_.trials * shape_.channels * shape_.samples)
      throw DataError(DataError::Kind::dimension_mismatch, "epochs: data size does not match shape");
    if (labels_.size() != shape_.trials)
      throw DataError(DataError::Kind::dimension_mismatch, "epochs: label count does not match trial count");
    if (channel_names_.size() != shape_.channels)
      throw DataError(DataError::Kind::dimension_mismatch, "epochs: channel name count does not match shape");
    if (!positions_.empty() && positions_.size() != shape_.channels)
      throw DataError(DataError::Kind::dimension_mismatch, "epochs: position count does not match channels");
    detail::require_unique_nonempty(channel_names_, "epochs");
    std::set<std::string> classes;
    for (const auto &c : class_set_) {
      if (!classes.insert(c).second)
        throw ConfigError("epochs: duplicate class '" + c + "'");
    }
    for (const auto &l : labels_) {
      if (!classes.count(l))
        throw DataError(DataError::Kind::malformed, "epochs: label '" + l + "' not in class set");
    }
    for (double v : data_) {
      if (!std::isfinite(v))
        throw DataError(DataError::Kind::non_finite, "epochs: non-finite sample values");
    }
  }

  const Shape &shape() const noexcept { return shape_; }
  std::size_t n_trials() const noexcept { return shape_.trials; }
  std::size_t n_channels() const noexcept { return shape_.channels; }
  std::size_t n_samples() const noexcept { return shape_.samples; }
  double fs() const noexcept { return fs_; }
  double t0() const noexcept { return t0_; }
  double duration() const noexcept { return static_cast<double>(shape_.samples) / fs_; }
  const std::vector<double> &data() const noexcept { return data_; }
  const std::vector<std::string> &labels() const noexcept { return labels_; }
  const std::vector<std::string> &channel_names() const noexcept { return channel_names_; }
  const std::vector<std::string> &class_set() const noexcept { return class_set_; }
  const std::vector<Point2> &positions() const noexcept { return positions_; }

  /// channels x samples view of one trial.
  Eigen::Map<const RowMatrixXd> trial(std::size_t i) const {
    return {data_.data() + i * shape_.channels * shape_.samples, static_cast<Eigen::Index>(shape_.channels),
            static_cast<Eigen::Index>(shape_.samples)};
  }

  /// Index of each trial's label in class_set.
  std::vector<std::size_t> label_indices() const {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t k = 0; k < class_set_.size(); ++k)
      idx[class_set_[k]] = k;
    std::vector<std::size_t> out;
    out.reserve(labels_.size());
    for (const auto &l : labels_)
      out.push_back(idx.at(l));
    return out;
  }

  friend bool operator==(const EpochSet &, const EpochSet &) = default;

private:
  std::vector<double> data_;
  Shape shape_;
  double fs_ = 1.0;
  double t0_ = 0.0;
  std::vector<std::string> labels_;
  std::vector<std::string> channel_names_;
  std::vector<std::string> class_set_;
  std::vector<Point2> positions_;
};

/// Reorders/subsets channels. Output channel order equals `names`.
inline EpochSet select_channels(const EpochSet &e, std::span<const std::string> names) {
  std::vector<std::size_t> rows;
  rows.reserve(names.size());
  for (const auto &n : names) {
    auto it = std::find(e.channel_names().begin(), e.channel_names().end(), n);
    if (it == e.channel_names().end())
      throw ConfigError("select_channels: unknown channel '" + n + "'");
    rows.push_back(static_cast<std::size_t>(it - e.channel_names().begin()));
  }
  const auto [T, C, S] = e.shape();
  std::vector<double> out(T * rows.size() * S);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double *src = e.data().data() + (t * C + rows[r]) * S;
      std::copy(src, src + S, out.begin() + static_cast<std::ptrdiff_t>((t * rows.size() + r) * S));
    }
  }
  std::vector<Point2> pos;
  if (!e.positions().empty()) {
    for (auto r : rows)
      pos.push_back(e.positions()[r]);
  }
  return EpochSet(std::move(out), {T, rows.size(), S}, e.fs(), e.t0(), e.labels(),
                  std::vector<std::string>(names.begin(), names.end()), e.class_set(), std::move(pos));
}

/// Keeps [t_start, t_end) of every trial. The result starts at t_start.
inline EpochSet crop_interval(const EpochSet &e, double t_start, double t_end) {
  if (!(t_end > t_start))
    throw ConfigError("crop_interval: t_end must exceed t_start");
  const std::int64_t offset = seconds_to_samples(t_start - e.t0(), e.fs());
  const std::int64_t count = seconds_to_samples(t_end - t_start, e.fs());
  if (offset < 0 || count <= 0 || offset + count > static_cast<std::int64_t>(e.n_samples()))
    throw ConfigError("crop_interval: window [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                      ") outside epoch extent [" + std::to_string(e.t0()) + ", " +
                      std::to_string(e.t0() + e.duration()) + "]");
  const auto [T, C, S] = e.shape();
  const auto n = static_cast<std::size_t>(count);
  std::vector<double> out(T * C * n);
  for (std::size_t row = 0; row < T * C; ++row) {
    const double *src = e.data().data() + row * S + offset;
    std::copy(src, src + n, out.begin() + static_cast<std::ptrdiff_t>(row * n));
  }
  return EpochSet(std::move(out), {T, C, n}, e.fs(), t_start, e.labels(), e.channel_names(), e.class_set(),
                  e.positions());
}

/// Keeps the listed trials, in the given order.
inline EpochSet select_trials(const EpochSet &e, std::span<const std::size_t> trials) {
  const auto [T, C, S] = e.shape();
  std::vector<double> out;
  out.reserve(trials.size() * C * S);
  std::vector<std::string> labels;
  for (auto t : trials) {
    if (t >= T)
      throw ConfigError("select_trials: trial index out of range");
    const double *src = e.data().data() + t * C * S;
    out.insert(out.end(), src, src + C * S);
    labels.push_back(e.labels()[t]);
  }
  return EpochSet(std::move(out), {trials.size(), C, S}, e.fs(), e.t0(), std::move(labels), e.channel_names(),
                  e.class_set(), e.positions());
}

/// Same tensor and metadata with labels replaced (used for label-permutation controls).
inline EpochSet relabel(const EpochSet &e, std::vector<std::string> labels) {
  return EpochSet(e.data(), e.shape(), e.fs(), e.t0(), std::move(labels), e.channel_names(), e.class_set(),
                  e.positions());
}

} // namespace videc

#endif // VIDEC_DATASET_HPP
