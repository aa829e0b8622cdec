#ifndef VIDEC_FILTER_HPP
#define VIDEC_FILTER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "videc/error.hpp"

namespace videc {

/// One second-order section: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  std::array<double, 3> b{1.0, 0.0, 0.0};
  std::array<double, 3> a{1.0, 0.0, 0.0};

  /// Both poles strictly inside the unit circle (stability triangle).
  bool stable() const noexcept { return std::abs(a[2]) < 1.0 && std::abs(a[1]) < 1.0 + a[2]; }

  std::array<std::complex<double>, 2> poles() const {
    const std::complex<double> disc = std::sqrt(std::complex<double>(a[1] * a[1] - 4.0 * a[2]));
    return {(-a[1] + disc) / 2.0, (-a[1] - disc) / 2.0};
  }

  std::complex<double> response(std::complex<double> z) const {
    const auto zi = 1.0 / z;
    return (b[0] + zi * (b[1] + zi * b[2])) / (a[0] + zi * (a[1] + zi * a[2]));
  }
};

struct BandpassDesign {
  int order = 0;
  double low_hz = 0.0;
  double high_hz = 0.0;
  double fs = 0.0;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  BandpassDesign design;

  /// Cascade transfer function on the unit circle at `hz`.
  std::complex<double> response(double hz) const {
    const auto z = std::polar(1.0, 2.0 * std::numbers::pi * hz / design.fs);
    std::complex<double> h = 1.0;
    for (const auto &s : sections)
      h *= s.response(z);
    return h;
  }

  double magnitude(double hz) const { return std::abs(response(hz)); }

  bool stable() const {
    return std::all_of(sections.begin(), sections.end(), [](const Biquad &s) { return s.stable(); });
  }
};

enum class FilterMode { forward, zero_phase };

inline FilterMode parse_filter_mode(const std::string &s) {
  if (s == "forward")
    return FilterMode::forward;
  if (s == "zero_phase" || s == "zero-phase")
    return FilterMode::zero_phase;
  throw ConfigError("unknown filter mode '" + s + "' (expected forward or zero_phase)");
}

inline std::string to_string(FilterMode m) { return m == FilterMode::forward ? "forward" : "zero_phase"; }

/// Digital Butterworth band-pass as a cascade of `order` biquads.
///
/// Analog low-pass prototype -> band-pass transform around the prewarped edges
/// -> bilinear transform. Each section carries one zero at z = 1 and one at
/// z = -1 and is scaled to unit gain at the band centre, so the cascade has
/// exactly -3.01 dB at both edges.
inline FilterCoefficients design_butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  if (order < 1)
    throw ConfigError("butterworth: order must be >= 1");
  if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0))
    throw ConfigError("butterworth: need 0 < low < high < fs/2 (got low=" + std::to_string(low_hz) +
                      ", high=" + std::to_string(high_hz) + ", fs=" + std::to_string(fs) + ")");
  using cd = std::complex<double>;
  const double pi = std::numbers::pi;
  const double k = 2.0 * fs;
  const double w1 = k * std::tan(pi * low_hz / fs);
  const double w2 = k * std::tan(pi * high_hz / fs);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;

  auto bilinear = [k](cd s) { return (k + s) / (k - s); };
  auto bandpass_roots = [&](cd p) {
    const cd pb = p * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0sq);
    return std::array<cd, 2>{(pb + disc) / 2.0, (pb - disc) / 2.0};
  };

  FilterCoefficients out;
  out.design = {order, low_hz, high_hz, fs};
  auto push_complex = [&](cd z) {
    Biquad s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -2.0 * z.real(), std::norm(z)};
    out.sections.push_back(s);
  };

  for (int i = 0; i < order / 2; ++i) {
    // Upper-half-plane prototype pole; its conjugate yields the conjugate sections.
    const cd p = std::polar(1.0, pi * (2.0 * i + order + 1.0) / (2.0 * order));
    for (const cd s : bandpass_roots(p))
      push_complex(bilinear(s));
  }
  if (order % 2 == 1) {
    const auto r = bandpass_roots(cd(-1.0, 0.0));
    const cd z1 = bilinear(r[0]);
    const cd z2 = bilinear(r[1]);
    Biquad s;
    s.b = {1.0, 0.0, -1.0};
    // The pair is either two real poles or one conjugate pair; both give real coefficients.
    s.a = {1.0, -(z1 + z2).real(), (z1 * z2).real()};
    out.sections.push_back(s);
  }

  const double centre_hz = fs / pi * std::atan(std::sqrt(w0sq) / k);
  const auto zc = std::polar(1.0, 2.0 * pi * centre_hz / fs);
  for (auto &s : out.sections) {
    const double g = std::abs(s.response(zc));
    for (auto &c : s.b)
      c /= g;
  }
  if (!out.stable())
    throw NumericalError("butterworth: designed section is unstable");
  return out;
}

/// Causal cascade evaluation (transposed direct form II) with zero initial state, in place.
inline void filter_forward_inplace(std::span<double> x, const FilterCoefficients &c) {
  for (const auto &s : c.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double &v : x) {
      const double in = v;
      const double out = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[1] * out + z2;
      z2 = s.b[2] * in - s.a[2] * out;
      v = out;
    }
  }
}

inline void apply_filter_inplace(std::span<double> x, const FilterCoefficients &c, FilterMode mode) {
  for (double v : x) {
    if (!std::isfinite(v))
      throw DataError(DataError::Kind::non_finite, "apply_filter: non-finite input");
  }
  filter_forward_inplace(x, c);
  if (mode == FilterMode::zero_phase) {
    std::reverse(x.begin(), x.end());
    filter_forward_inplace(x, c);
    std::reverse(x.begin(), x.end());
  }
}

/// Filters one channel. zero_phase runs the cascade forward then over the
/// time-reversed output, giving |H|^2 and zero group delay.
inline std::vector<double> apply_filter(std::span<const double> signal, const FilterCoefficients &c,
                                        FilterMode mode) {
  std::vector<double> y(signal.begin(), signal.end());
  apply_filter_inplace(y, c, mode);
  return y;
}

} // namespace videc

#endif // VIDEC_FILTER_HPP
