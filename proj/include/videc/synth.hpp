#ifndef VIDEC_SYNTH_HPP
#define VIDEC_SYNTH_HPP

// Synthetic visual-imagery EEG with known ground truth.
//
// Background: independent pink-noise generators mixed through the symmetric
// square root of a Wishart-style spatial covariance (volume conduction).
// Signal: for every (class, region) pair a narrow-band oscillation with a
// fixed class-specific spatial projection onto the region's channels. During
// a trial's imagery window the sources of its class switch on with random
// phase and log-normal amplitude jitter, scaled by the region's gain over the
// early and late part of the window.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "videc/dataset.hpp"
#include "videc/montage.hpp"
#include "videc/random.hpp"

namespace videc {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range &, const Range &) = default;
};

/// Source placement and interval gain schedule of one cortical region.
struct RegionSpec {
  std::string name;
  std::vector<std::string> channels;
  double gain_early = 1.0; // over [0, gain_split_s)
  double gain_late = 1.0;  // over [gain_split_s, epoch_s)
  friend bool operator==(const RegionSpec &, const RegionSpec &) = default;
};

inline std::vector<RegionSpec> default_regions() {
  return {{"prefrontal", default_prefrontal_group(), 1.0, 0.5},
          {"occipital", default_occipital_group(), 0.7, 0.7}};
}

struct SynthConfig {
  std::size_t n_classes = 6;
  std::vector<std::string> class_labels; // empty: the six word classes (or class_1..K)
  std::size_t trials_per_class = 100;
  std::size_t n_channels = 64;
  double fs_raw = 1000.0;
  double epoch_s = 2.0;
  double gain_split_s = 1.0;
  Range rest_s{3.0, 3.0};
  Range cue_s{2.0, 2.0};
  Range cross_s{0.8, 1.2};
  double tail_s = 1.0;
  std::vector<RegionSpec> regions = default_regions();
  double snr_db = -13.0;
  double noise_rms_uv = 10.0;
  Range source_band_hz{8.0, 30.0};
  double amplitude_jitter = 0.3;   // sigma of the log-normal per-trial amplitude factor
  double wishart_dof_ratio = 2.0;  // degrees of freedom per channel of the noise covariance
  std::uint64_t seed = 1;

  /// Class labels in use (resolves the default).
  std::vector<std::string> labels() const {
    if (!class_labels.empty())
      return class_labels;
    if (n_classes == 6)
      return default_word_classes();
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n_classes; ++k)
      out.push_back("class_" + std::to_string(k + 1));
    return out;
  }

  /// Sources are off entirely (pure-noise control).
  bool sources_off() const { return !std::isfinite(snr_db) || snr_db <= -100.0; }
};

inline void validate(const SynthConfig &cfg) {
  const auto labels = cfg.labels();
  if (cfg.n_classes < 1 || labels.size() != cfg.n_classes)
    throw ConfigError("synth: class_labels must list n_classes labels");
  if (cfg.trials_per_class < 1)
    throw ConfigError("synth: trials_per_class must be >= 1");
  if (!(cfg.fs_raw > 0.0) || !(cfg.epoch_s > 0.0) || !(cfg.gain_split_s >= 0.0))
    throw ConfigError("synth: fs_raw and epoch_s must be positive");
  for (const auto &r : {cfg.rest_s, cfg.cue_s, cfg.cross_s}) {
    if (r.lo < 0.0 || r.hi < r.lo)
      throw ConfigError("synth: timing ranges need 0 <= lo <= hi");
  }
  if (std::isnan(cfg.snr_db) || cfg.snr_db == std::numeric_limits<double>::infinity())
    throw ConfigError("synth: snr_db must be finite or -inf");
  if (!(cfg.noise_rms_uv > 0.0) || cfg.amplitude_jitter < 0.0 || !(cfg.wishart_dof_ratio >= 1.0))
    throw ConfigError("synth: invalid noise parameters");
  if (!(cfg.source_band_hz.lo > 0.0) || cfg.source_band_hz.hi < cfg.source_band_hz.lo ||
      cfg.source_band_hz.hi >= cfg.fs_raw / 2.0)
    throw ConfigError("synth: source band must lie inside (0, fs_raw/2)");
  const auto montage = standard_montage_prefix(cfg.n_channels);
  for (const auto &r : cfg.regions) {
    if (r.gain_early < 0.0 || r.gain_late < 0.0)
      throw ConfigError("synth: region '" + r.name + "' has a negative gain");
    if (r.channels.empty())
      throw ConfigError("synth: region '" + r.name + "' has no channels");
    for (const auto &c : r.channels) {
      if (std::find(montage.channel_names().begin(), montage.channel_names().end(), c) ==
          montage.channel_names().end())
        throw ConfigError("synth: region '" + r.name + "' references unknown channel '" + c + "'");
    }
  }
}

struct SourceTruth {
  std::string label;
  std::string region;
  double frequency_hz = 0.0;
  double gain_early = 0.0;
  double gain_late = 0.0;
  Eigen::VectorXd projection; // one weight per montage channel, zero off the region; max |w| = 1
};

struct GroundTruth {
  std::vector<std::string> class_set;
  std::vector<std::string> channel_names;
  std::vector<SourceTruth> sources;
  double snr_db = 0.0;
  double source_rms_uv = 0.0; // on the peak channel at unit gain
};

/// Source projections, frequencies and gain schedule implied by the config.
inline GroundTruth describe_ground_truth(const SynthConfig &cfg) {
  validate(cfg);
  const auto montage = standard_montage_prefix(cfg.n_channels);
  GroundTruth g;
  g.class_set = cfg.labels();
  g.channel_names = montage.channel_names();
  g.snr_db = cfg.snr_db;
  g.source_rms_uv = cfg.sources_off() ? 0.0 : cfg.noise_rms_uv * std::pow(10.0, cfg.snr_db / 20.0);
  auto rng = make_rng(cfg.seed, {0x736f75726365ULL});
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> freq(cfg.source_band_hz.lo, cfg.source_band_hz.hi);
  for (const auto &label : g.class_set) {
    for (const auto &region : cfg.regions) {
      SourceTruth s;
      s.label = label;
      s.region = region.name;
      s.gain_early = region.gain_early;
      s.gain_late = region.gain_late;
      s.frequency_hz = freq(rng);
      s.projection = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(montage.size()));
      for (const auto &c : region.channels)
        s.projection(static_cast<Eigen::Index>(montage.index_of(c))) = normal(rng);
      s.projection /= s.projection.cwiseAbs().maxCoeff();
      g.sources.push_back(std::move(s));
    }
  }
  return g;
}

namespace detail {

/// Pink (1/f) shaping of white noise: Kellet's refined parallel first-order bank.
class PinkFilter {
public:
  double operator()(double white) {
    b_[0] = 0.99886 * b_[0] + white * 0.0555179;
    b_[1] = 0.99332 * b_[1] + white * 0.0750759;
    b_[2] = 0.96900 * b_[2] + white * 0.1538520;
    b_[3] = 0.86650 * b_[3] + white * 0.3104856;
    b_[4] = 0.55000 * b_[4] + white * 0.5329522;
    b_[5] = -0.7616 * b_[5] - white * 0.0168980;
    const double out = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + white * 0.5362;
    b_[6] = white * 0.115926;
    return out;
  }

  /// Output standard deviation for unit-variance white input (impulse-response energy).
  static double output_std() {
    static const double s = [] {
      PinkFilter f;
      double energy = 0.0;
      for (int i = 0; i < 200000; ++i) {
        const double h = f(i == 0 ? 1.0 : 0.0);
        energy += h * h;
      }
      return std::sqrt(energy);
    }();
    return s;
  }

private:
  double b_[7] = {0, 0, 0, 0, 0, 0, 0};
};

} // namespace detail

/// Symmetric square root of S = G G^T / dof, G ~ N(0,1) of size d x dof.
inline Eigen::MatrixXd noise_mixing_matrix(std::size_t d, double dof_ratio, std::uint64_t seed) {
  const auto dof = static_cast<Eigen::Index>(std::ceil(dof_ratio * static_cast<double>(d)));
  auto rng = make_rng(seed, {0x6d6978ULL});
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d), dof);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      g(i, j) = normal(rng);
  const Eigen::MatrixXd s = g * g.transpose() / static_cast<double>(dof);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

struct SynthTimeline {
  std::vector<Event> events; // imagery onsets
  std::size_t n_samples = 0;
};

inline SynthTimeline synth_timeline(const SynthConfig &cfg) {
  const auto labels = cfg.labels();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < labels.size(); ++k)
    order.insert(order.end(), cfg.trials_per_class, k);
  auto shuffle_rng = make_rng(cfg.seed, {0x6f72646572ULL});
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  auto rng = make_rng(cfg.seed, {0x74696d65ULL});
  auto draw = [&rng](Range r) { return r.hi > r.lo ? std::uniform_real_distribution<double>(r.lo, r.hi)(rng) : r.lo; };

  SynthTimeline tl;
  double t = 0.0;
  for (auto k : order) {
    t += draw(cfg.rest_s) + draw(cfg.cue_s) + draw(cfg.cross_s);
    tl.events.push_back({seconds_to_samples(t, cfg.fs_raw), labels[k]});
    t += cfg.epoch_s;
  }
  t += cfg.tail_s;
  tl.n_samples = static_cast<std::size_t>(std::ceil(t * cfg.fs_raw));
  return tl;
}

/// Continuous recording with imagery-onset events; fully determined by cfg.seed.
inline RawRecording generate_dataset(const SynthConfig &cfg) {
  validate(cfg);
  const auto montage = standard_montage_prefix(cfg.n_channels);
  const auto truth = describe_ground_truth(cfg);
  const auto tl = synth_timeline(cfg);
  const auto d = static_cast<Eigen::Index>(cfg.n_channels);
  const auto n = static_cast<Eigen::Index>(tl.n_samples);

  // Unmixed pink noise, one generator per row, unit variance.
  RowMatrixXf data(d, n);
  const double pink_scale = 1.0 / detail::PinkFilter::output_std();
  for (Eigen::Index c = 0; c < d; ++c) {
    auto rng = make_rng(cfg.seed, {0x6e6f697365ULL, static_cast<std::uint64_t>(c)});
    std::normal_distribution<double> normal;
    detail::PinkFilter pink;
    float *row = data.row(c).data();
    for (Eigen::Index i = 0; i < n; ++i)
      row[i] = static_cast<float>(pink(normal(rng)) * pink_scale);
  }

  // Spatial mixing, blockwise in place.
  const Eigen::MatrixXf mix =
      (noise_mixing_matrix(cfg.n_channels, cfg.wishart_dof_ratio, cfg.seed) * cfg.noise_rms_uv).cast<float>();
  constexpr Eigen::Index kBlock = 4096;
  Eigen::MatrixXf block(d, kBlock);
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - start);
    block.leftCols(len).noalias() = mix * data.middleCols(start, len);
    data.middleCols(start, len) = block.leftCols(len);
  }

  if (!cfg.sources_off()) {
    const double amp = truth.source_rms_uv * std::numbers::sqrt2;
    const auto window = seconds_to_samples(cfg.epoch_s, cfg.fs_raw);
    const auto split = seconds_to_samples(cfg.gain_split_s, cfg.fs_raw);
    const std::size_t per_class = cfg.regions.size();
    std::vector<double> wave(static_cast<std::size_t>(window));
    for (std::size_t i = 0; i < tl.events.size(); ++i) {
      const auto &ev = tl.events[i];
      const auto k = static_cast<std::size_t>(
          std::find(truth.class_set.begin(), truth.class_set.end(), ev.label) - truth.class_set.begin());
      auto rng = make_rng(cfg.seed, {0x747269616cULL, i});
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      std::normal_distribution<double> normal;
      for (std::size_t r = 0; r < per_class; ++r) {
        const auto &src = truth.sources[k * per_class + r];
        const double ph = phase(rng);
        const double jitter = std::exp(cfg.amplitude_jitter * normal(rng));
        for (std::int64_t j = 0; j < window; ++j) {
          const double gain = j < split ? src.gain_early : src.gain_late;
          const double t = static_cast<double>(j) / cfg.fs_raw;
          wave[static_cast<std::size_t>(j)] =
              amp * jitter * gain * std::sin(2.0 * std::numbers::pi * src.frequency_hz * t + ph);
        }
        for (Eigen::Index c = 0; c < d; ++c) {
          const double w = src.projection(c);
          if (w == 0.0)
            continue;
          float *row = data.row(c).data() + ev.onset_sample;
          const auto len = std::min<std::int64_t>(window, n - ev.onset_sample);
          for (std::int64_t j = 0; j < len; ++j)
            row[j] += static_cast<float>(w * wave[static_cast<std::size_t>(j)]);
        }
      }
    }
  }
  return RawRecording(std::move(data), cfg.fs_raw, montage, tl.events);
}

} // namespace videc

#endif // VIDEC_SYNTH_HPP
