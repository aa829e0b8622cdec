#ifndef VIDEC_PREPROCESS_HPP
#define VIDEC_PREPROCESS_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "videc/dataset.hpp"
#include "videc/filter.hpp"
#include "videc/resample.hpp"

namespace videc {

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
  friend bool operator==(const TimeWindow &, const TimeWindow &) = default;
};

/// Resamples every channel and remaps event onsets to the new rate.
inline RawRecording resample_recording(const RawRecording &rec, double fs_out) {
  const Resampler rs(rec.fs(), fs_out);
  const auto n_out = rs.output_length(rec.n_samples());
  RowMatrixXf out(static_cast<Eigen::Index>(rec.n_channels()), static_cast<Eigen::Index>(n_out));
  std::vector<double> row(rec.n_samples());
  for (Eigen::Index c = 0; c < out.rows(); ++c) {
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = rec.data()(c, static_cast<Eigen::Index>(i));
    const auto y = rs(row);
    for (std::size_t i = 0; i < n_out; ++i)
      out(c, static_cast<Eigen::Index>(i)) = static_cast<float>(y[i]);
  }
  std::vector<Event> events;
  for (const auto &e : rec.events()) {
    const auto onset = std::min<std::int64_t>(rs.map_index(e.onset_sample), static_cast<std::int64_t>(n_out) - 1);
    events.push_back({onset, e.label});
  }
  return RawRecording(std::move(out), fs_out, rec.montage(), std::move(events));
}

/// Filters every channel of a recording (computation in double).
inline RawRecording filter_recording(RawRecording rec, const FilterCoefficients &c, FilterMode mode) {
  const double fs = rec.fs();
  Montage montage = rec.montage();
  std::vector<Event> events = rec.events();
  RowMatrixXf data = std::move(rec).take_data();
  std::vector<double> row(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index ch = 0; ch < data.rows(); ++ch) {
    for (Eigen::Index i = 0; i < data.cols(); ++i)
      row[static_cast<std::size_t>(i)] = data(ch, i);
    apply_filter_inplace(row, c, mode);
    for (Eigen::Index i = 0; i < data.cols(); ++i)
      data(ch, i) = static_cast<float>(row[static_cast<std::size_t>(i)]);
  }
  return RawRecording(std::move(data), fs, std::move(montage), std::move(events));
}

/// One trial per event whose label is in `label_filter` (all labels if empty).
///
/// Trial covers samples [onset + round(start*fs), onset + round(end*fs)).
/// class_set follows the filter order, or sorted labels when unfiltered.
inline EpochSet epoch(const RawRecording &rec, const std::vector<std::string> &label_filter, TimeWindow window,
                      bool allow_empty = false) {
  if (!(window.end > window.start))
    throw ConfigError("epoch: window end must exceed start");
  const std::int64_t off0 = seconds_to_samples(window.start, rec.fs());
  const std::int64_t off1 = seconds_to_samples(window.end, rec.fs());
  const auto n_s = static_cast<std::size_t>(off1 - off0);
  const std::set<std::string> wanted(label_filter.begin(), label_filter.end());

  std::vector<std::size_t> picked;
  std::vector<std::size_t> out_of_bounds;
  for (std::size_t i = 0; i < rec.events().size(); ++i) {
    const auto &e = rec.events()[i];
    if (!wanted.empty() && !wanted.count(e.label))
      continue;
    if (e.onset_sample + off0 < 0 || e.onset_sample + off1 > static_cast<std::int64_t>(rec.n_samples()))
      out_of_bounds.push_back(i);
    else
      picked.push_back(i);
  }
  if (!out_of_bounds.empty()) {
    std::string idx;
    for (auto i : out_of_bounds)
      idx += (idx.empty() ? "" : ", ") + std::to_string(i);
    throw DataError(DataError::Kind::malformed, "epoch: events too close to the recording boundary: " + idx);
  }
  if (picked.empty() && !allow_empty)
    throw DataError(DataError::Kind::malformed, "epoch: no events match the label filter");

  std::vector<std::string> class_set;
  std::set<std::string> present;
  for (auto i : picked)
    present.insert(rec.events()[i].label);
  if (label_filter.empty()) {
    class_set.assign(present.begin(), present.end());
  } else {
    for (const auto &l : label_filter) {
      if (present.count(l) && std::find(class_set.begin(), class_set.end(), l) == class_set.end())
        class_set.push_back(l);
    }
  }

  const std::size_t n_ch = rec.n_channels();
  std::vector<double> data(picked.size() * n_ch * n_s);
  std::vector<std::string> labels;
  for (std::size_t t = 0; t < picked.size(); ++t) {
    const auto &e = rec.events()[picked[t]];
    labels.push_back(e.label);
    const auto first = static_cast<Eigen::Index>(e.onset_sample + off0);
    for (std::size_t c = 0; c < n_ch; ++c) {
      double *dst = data.data() + (t * n_ch + c) * n_s;
      for (std::size_t j = 0; j < n_s; ++j)
        dst[j] = rec.data()(static_cast<Eigen::Index>(c), first + static_cast<Eigen::Index>(j));
    }
  }
  return EpochSet(std::move(data), {picked.size(), n_ch, n_s}, rec.fs(),
                  static_cast<double>(off0) / rec.fs(), std::move(labels), rec.montage().channel_names(),
                  std::move(class_set), rec.montage().positions());
}

/// Subtracts, per trial and channel, the mean over [t_a, t_b) from the whole trial.
inline EpochSet baseline_correct(const EpochSet &e, TimeWindow baseline = {-0.2, 0.0}) {
  const std::int64_t i0 = seconds_to_samples(baseline.start - e.t0(), e.fs());
  const std::int64_t i1 = seconds_to_samples(baseline.end - e.t0(), e.fs());
  if (i0 < 0 || i1 > static_cast<std::int64_t>(e.n_samples()) || i1 <= i0)
    throw ConfigError("baseline_correct: window [" + std::to_string(baseline.start) + ", " +
                      std::to_string(baseline.end) + "] outside epoch extent");
  std::vector<double> data = e.data();
  const std::size_t S = e.n_samples();
  for (std::size_t row = 0; row < e.n_trials() * e.n_channels(); ++row) {
    double *x = data.data() + row * S;
    double sum = 0.0;
    for (auto j = i0; j < i1; ++j)
      sum += x[j];
    const double mean = sum / static_cast<double>(i1 - i0);
    for (std::size_t j = 0; j < S; ++j)
      x[j] -= mean;
  }
  return EpochSet(std::move(data), e.shape(), e.fs(), e.t0(), e.labels(), e.channel_names(), e.class_set(),
                  e.positions());
}

enum class StageOrder { resample_then_filter, filter_then_resample };

inline std::string to_string(StageOrder o) {
  return o == StageOrder::resample_then_filter ? "resample_then_filter" : "filter_then_resample";
}

inline StageOrder parse_stage_order(const std::string &s) {
  if (s == "resample_then_filter")
    return StageOrder::resample_then_filter;
  if (s == "filter_then_resample")
    return StageOrder::filter_then_resample;
  throw ConfigError("unknown stage order '" + s + "'");
}

/// Continuous-to-epochs conditioning chain.
struct PreprocessConfig {
  double target_fs = 256.0;
  int filter_order = 5;
  double band_low_hz = 1.0;
  double band_high_hz = 100.0;
  FilterMode filter_mode = FilterMode::zero_phase;
  StageOrder stage_order = StageOrder::resample_then_filter;
  TimeWindow epoch_window{-0.2, 2.0};
  TimeWindow baseline_window{-0.2, 0.0};
  std::vector<std::string> classes = {"ambulance", "clock", "light", "toilet", "TV", "water"};
  bool allow_empty = false;
};

/// resample -> band-pass -> epoch -> baseline (or filter first when configured).
inline EpochSet preprocess_recording(RawRecording rec, const PreprocessConfig &cfg) {
  auto do_filter = [&](RawRecording r) {
    const auto c = design_butterworth_bandpass(cfg.filter_order, cfg.band_low_hz, cfg.band_high_hz, r.fs());
    return filter_recording(std::move(r), c, cfg.filter_mode);
  };
  if (cfg.stage_order == StageOrder::resample_then_filter) {
    if (rec.fs() != cfg.target_fs)
      rec = resample_recording(rec, cfg.target_fs);
    rec = do_filter(std::move(rec));
  } else {
    rec = do_filter(std::move(rec));
    if (rec.fs() != cfg.target_fs)
      rec = resample_recording(rec, cfg.target_fs);
  }
  auto epochs = epoch(rec, cfg.classes, cfg.epoch_window, cfg.allow_empty);
  return baseline_correct(epochs, cfg.baseline_window);
}

} // namespace videc

#endif // VIDEC_PREPROCESS_HPP
