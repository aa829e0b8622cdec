#ifndef VIDEC_RESAMPLE_HPP
#define VIDEC_RESAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "videc/error.hpp"

namespace videc {

struct Ratio {
  std::int64_t up = 1;
  std::int64_t down = 1;
  friend bool operator==(const Ratio &, const Ratio &) = default;
};

/// fs_out / fs_in as up/down in lowest terms with down <= max_den.
inline Ratio rational_ratio(double fs_in, double fs_out, std::int64_t max_den = 1000) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0) || !std::isfinite(fs_in) || !std::isfinite(fs_out))
    throw ConfigError("resample: rates must be positive and finite");
  const double r = fs_out / fs_in;
  // Continued-fraction convergents; stop at the first exact-enough one.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = r;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(x);
    if (a_d > 1e12)
      break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den)
      break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - r) <= 1e-9 * r) {
      const std::int64_t g = std::gcd(h1, k1);
      return {h1 / g, k1 / g};
    }
    const double frac = x - a_d;
    if (frac < 1e-15)
      break;
    x = 1.0 / frac;
  }
  throw ConfigError("resample: ratio " + std::to_string(fs_out) + "/" + std::to_string(fs_in) +
                    " has no rational form with denominator <= " + std::to_string(max_den) +
                    "; pass explicit integer rates");
}

namespace detail {

/// Zeroth-order modified Bessel function of the first kind (power series).
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17)
      break;
  }
  return sum;
}

} // namespace detail

/// Anti-aliasing design of the polyphase resampler.
struct ResamplerDesign {
  double stopband_db = 60.0;
  /// Transition width as a fraction of the lower rate's Nyquist frequency;
  /// the stopband starts exactly at that Nyquist frequency.
  double transition_fraction = 0.1;
};

/// Rational polyphase resampler: upsample by p, Kaiser-windowed sinc low-pass,
/// downsample by q. The filter is built once and reused across channels.
class Resampler {
public:
  Resampler(double fs_in, double fs_out, ResamplerDesign design = {})
      : fs_in_(fs_in), fs_out_(fs_out), ratio_(rational_ratio(fs_in, fs_out)) {
    if (ratio_.up == 1 && ratio_.down == 1)
      return;
    const double pi = std::numbers::pi;
    const double fs_up = fs_in * static_cast<double>(ratio_.up);
    const double nyq = std::min(fs_in, fs_out) / 2.0;
    const double transition_hz = design.transition_fraction * nyq;
    const double cutoff_hz = nyq - transition_hz / 2.0;
    const double a = design.stopband_db;
    double beta = 0.0;
    if (a > 50.0)
      beta = 0.1102 * (a - 8.7);
    else if (a >= 21.0)
      beta = 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0);
    const double dw = 2.0 * pi * transition_hz / fs_up;
    auto taps = static_cast<std::int64_t>(std::ceil((a - 7.95) / (2.285 * dw))) + 1;
    if (taps % 2 == 0)
      ++taps;
    const auto n_taps = static_cast<std::size_t>(taps);
    delay_ = (taps - 1) / 2;

    std::vector<double> h(n_taps);
    const double fc = cutoff_hz / fs_up; // cycles per upsampled sample
    const double i0b = detail::bessel_i0(beta);
    for (std::size_t i = 0; i < n_taps; ++i) {
      const double m = static_cast<double>(static_cast<std::int64_t>(i) - delay_);
      const double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * pi * fc * m) / (pi * m);
      const double ratio = m / static_cast<double>(delay_);
      const double w = detail::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) / i0b;
      h[i] = sinc * w * static_cast<double>(ratio_.up);
    }

    // Branch r holds taps r, r+p, r+2p, ... stored reversed so each output is
    // one forward dot product against a contiguous input window.
    const auto p = static_cast<std::size_t>(ratio_.up);
    branches_.resize(p);
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t i = r; i < n_taps; i += p)
        branches_[r].push_back(h[i]);
      std::reverse(branches_[r].begin(), branches_[r].end());
    }
    n_taps_ = n_taps;
  }

  Ratio ratio() const noexcept { return ratio_; }
  double fs_in() const noexcept { return fs_in_; }
  double fs_out() const noexcept { return fs_out_; }
  std::size_t n_taps() const noexcept { return n_taps_; }

  /// ceil(n * p / q)
  std::size_t output_length(std::size_t n) const {
    const auto num = static_cast<std::int64_t>(n) * ratio_.up;
    return static_cast<std::size_t>((num + ratio_.down - 1) / ratio_.down);
  }

  /// Output index of input sample `i` (nearest, half away from zero).
  std::int64_t map_index(std::int64_t i) const {
    return std::llround(static_cast<double>(i) * static_cast<double>(ratio_.up) /
                        static_cast<double>(ratio_.down));
  }

  std::vector<double> operator()(std::span<const double> x) const {
    if (ratio_.up == 1 && ratio_.down == 1)
      return {x.begin(), x.end()};
    const std::size_t n_out = output_length(x.size());
    std::vector<double> y(n_out);
    const auto p = ratio_.up;
    const auto n = static_cast<std::int64_t>(x.size());
    for (std::size_t m = 0; m < n_out; ++m) {
      // Upsampled-domain index aligned with the filter's centre tap.
      const std::int64_t j = static_cast<std::int64_t>(m) * ratio_.down + delay_;
      const std::int64_t r = j % p;
      const std::int64_t base = j / p; // newest contributing input index
      const auto &br = branches_[static_cast<std::size_t>(r)];
      const auto len = static_cast<std::int64_t>(br.size());
      // Reversed branch element e multiplies input base - (len - 1) + e.
      const std::int64_t first = base - (len - 1);
      const std::int64_t lo = std::max<std::int64_t>(0, -first);
      const std::int64_t hi = std::min<std::int64_t>(len, n - first);
      if (hi <= lo)
        continue;
      Eigen::Map<const Eigen::VectorXd> taps(br.data() + lo, hi - lo);
      Eigen::Map<const Eigen::VectorXd> seg(x.data() + first + lo, hi - lo);
      y[m] = taps.dot(seg);
    }
    return y;
  }

private:
  double fs_in_;
  double fs_out_;
  Ratio ratio_;
  std::int64_t delay_ = 0;
  std::size_t n_taps_ = 0;
  std::vector<std::vector<double>> branches_;
};

struct ResampleResult {
  std::vector<double> signal;
  double fs = 0.0;
};

inline ResampleResult resample(std::span<const double> signal, double fs_in, double fs_out) {
  for (double v : signal) {
    if (!std::isfinite(v))
      throw DataError(DataError::Kind::non_finite, "resample: non-finite input");
  }
  Resampler r(fs_in, fs_out);
  return {r(signal), fs_out};
}

} // namespace videc

#endif // VIDEC_RESAMPLE_HPP
