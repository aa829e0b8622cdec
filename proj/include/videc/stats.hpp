#ifndef VIDEC_STATS_HPP
#define VIDEC_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "videc/error.hpp"
#include "videc/random.hpp"

namespace videc {

enum class Sidedness { two_sided, greater, less };

inline std::string to_string(Sidedness s) {
  switch (s) {
  case Sidedness::two_sided:
    return "two-sided";
  case Sidedness::greater:
    return "greater";
  case Sidedness::less:
    return "less";
  }
  return "two-sided";
}

inline Sidedness parse_sidedness(const std::string &s) {
  if (s == "two-sided" || s == "two_sided")
    return Sidedness::two_sided;
  if (s == "greater")
    return Sidedness::greater;
  if (s == "less")
    return Sidedness::less;
  throw ConfigError("unknown sidedness '" + s + "' (expected two-sided, greater or less)");
}

/// Null resampling for paired data.
///  sign_flip: wild bootstrap with Rademacher multipliers on the observed differences.
///  centered:  draw the mean-centred differences with replacement.
enum class PairedScheme { sign_flip, centered };

inline std::string to_string(PairedScheme s) { return s == PairedScheme::sign_flip ? "sign_flip" : "centered"; }

inline PairedScheme parse_paired_scheme(const std::string &s) {
  if (s == "sign_flip" || s == "sign-flip")
    return PairedScheme::sign_flip;
  if (s == "centered")
    return PairedScheme::centered;
  throw ConfigError("unknown paired scheme '" + s + "'");
}

struct BootstrapOptions {
  bool paired = true;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  Sidedness sidedness = Sidedness::two_sided;
  double alpha = 0.05;
  PairedScheme paired_scheme = PairedScheme::sign_flip;
};

struct StatTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  bool paired = true;
  Sidedness sidedness = Sidedness::two_sided;
  PairedScheme paired_scheme = PairedScheme::sign_flip;
  double mean_difference = 0.0; // mean(a) - mean(b)
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool degenerate = false; // zero variance; p fixed by convention
  bool significant() const noexcept { return p_value < alpha; }
};

namespace detail {

inline double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x)
    s += v;
  return s / static_cast<double>(x.size());
}

inline double var_of(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x)
    s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

/// mean / (sd / sqrt(n)); +-inf when sd = 0 and mean != 0, 0 when both vanish.
inline double one_sample_t(std::span<const double> d) {
  const double m = mean_of(d);
  const double sd = std::sqrt(var_of(d, m));
  if (sd == 0.0)
    return m == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
  return m / (sd / std::sqrt(static_cast<double>(d.size())));
}

inline double welch_t(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a), mb = mean_of(b);
  const double se2 = var_of(a, ma) / static_cast<double>(a.size()) + var_of(b, mb) / static_cast<double>(b.size());
  const double diff = ma - mb;
  if (se2 == 0.0)
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / std::sqrt(se2);
}

/// t* as-or-more extreme than t_obs (ties count, relative slack 1e-12).
inline bool as_extreme(double t_star, double t_obs, Sidedness side) {
  const double slack = 1e-12 * (std::isfinite(t_obs) ? std::abs(t_obs) : 0.0);
  switch (side) {
  case Sidedness::two_sided:
    return std::abs(t_star) >= std::abs(t_obs) - slack;
  case Sidedness::greater:
    return t_star >= t_obs - slack;
  case Sidedness::less:
    return t_star <= t_obs + slack;
  }
  return false;
}

inline constexpr std::size_t kBatch = 1000;

} // namespace detail

/// Null distribution of the studentized statistic, resample by resample.
/// Batches draw from seeds derived from (seed, batch) so the sequence does not
/// depend on how batches are scheduled.
inline std::vector<double> bootstrap_null(std::span<const double> a, std::span<const double> b,
                                          const BootstrapOptions &opt) {
  std::vector<double> null;
  null.reserve(opt.resamples);
  if (opt.paired) {
    std::vector<double> d(a.size()), star(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      d[i] = a[i] - b[i];
    const double md = detail::mean_of(d);
    for (std::size_t start = 0; start < opt.resamples; start += detail::kBatch) {
      auto rng = make_rng(opt.seed, {0x7061697265ULL, start / detail::kBatch});
      const std::size_t stop = std::min(opt.resamples, start + detail::kBatch);
      for (std::size_t r = start; r < stop; ++r) {
        if (opt.paired_scheme == PairedScheme::sign_flip) {
          std::uint64_t bits = 0;
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (i % 64 == 0)
              bits = rng();
            star[i] = (bits >> (i % 64)) & 1U ? d[i] : -d[i];
          }
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
          for (auto &s : star)
            s = d[pick(rng)] - md;
        }
        null.push_back(detail::one_sample_t(star));
      }
    }
  } else {
    const double ma = detail::mean_of(a), mb = detail::mean_of(b);
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const double pooled = detail::mean_of(all);
    std::vector<double> ac(a.size()), bc(b.size()), as(a.size()), bs(b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      ac[i] = a[i] - ma + pooled;
    for (std::size_t i = 0; i < b.size(); ++i)
      bc[i] = b[i] - mb + pooled;
    std::uniform_int_distribution<std::size_t> pa(0, a.size() - 1), pb(0, b.size() - 1);
    for (std::size_t start = 0; start < opt.resamples; start += detail::kBatch) {
      auto rng = make_rng(opt.seed, {0x756e706169ULL, start / detail::kBatch});
      const std::size_t stop = std::min(opt.resamples, start + detail::kBatch);
      for (std::size_t r = start; r < stop; ++r) {
        for (auto &s : as)
          s = ac[pa(rng)];
        for (auto &s : bs)
          s = bc[pb(rng)];
        null.push_back(detail::welch_t(as, bs));
      }
    }
  }
  return null;
}

/// (#{t* as-or-more extreme than t_obs} + 1) / (B + 1).
inline double bootstrap_p_value(std::span<const double> null, double t_obs, Sidedness side) {
  std::size_t count = 0;
  for (double t : null)
    count += detail::as_extreme(t, t_obs, side) ? 1 : 0;
  return static_cast<double>(count + 1) / static_cast<double>(null.size() + 1);
}

/// Nonparametric bootstrap test of mean(a) vs mean(b) with a studentized statistic.
///
/// Paired: t = mean(d) / (sd(d)/sqrt(n)), d = a - b. Unpaired: Welch t, null
/// resampled from each group shifted to the pooled mean. When the observed
/// variance is zero the statistic is 0 (p = 1) or +-inf (p = 1/(B+1) if in the
/// tested direction) and the result is flagged degenerate.
inline StatTestResult bootstrap_test(std::span<const double> a, std::span<const double> b,
                                     const BootstrapOptions &opt) {
  if (opt.resamples < 1)
    throw ConfigError("bootstrap_test: need at least one resample");
  if (a.size() < 2 || b.size() < 2)
    throw ConfigError("bootstrap_test: need at least 2 samples per group");
  if (opt.paired && a.size() != b.size())
    throw ConfigError("bootstrap_test: paired mode needs equal sample counts (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  for (double v : a)
    if (!std::isfinite(v))
      throw ConfigError("bootstrap_test: non-finite sample");
  for (double v : b)
    if (!std::isfinite(v))
      throw ConfigError("bootstrap_test: non-finite sample");

  StatTestResult r;
  r.n_resamples = opt.resamples;
  r.seed = opt.seed;
  r.alpha = opt.alpha;
  r.paired = opt.paired;
  r.sidedness = opt.sidedness;
  r.paired_scheme = opt.paired_scheme;
  r.n_a = a.size();
  r.n_b = b.size();
  r.mean_difference = detail::mean_of(a) - detail::mean_of(b);

  if (opt.paired) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      d[i] = a[i] - b[i];
    r.t_statistic = detail::one_sample_t(d);
    r.degenerate = detail::var_of(d, detail::mean_of(d)) == 0.0;
  } else {
    r.t_statistic = detail::welch_t(a, b);
    r.degenerate = detail::var_of(a, detail::mean_of(a)) == 0.0 && detail::var_of(b, detail::mean_of(b)) == 0.0;
  }

  const double inv = 1.0 / static_cast<double>(opt.resamples + 1);
  if (r.degenerate) {
    if (r.t_statistic == 0.0)
      r.p_value = 1.0;
    else {
      const bool in_direction = opt.sidedness == Sidedness::two_sided ||
                                (opt.sidedness == Sidedness::greater) == (r.t_statistic > 0.0);
      r.p_value = in_direction ? inv : 1.0;
    }
    return r;
  }
  const auto null = bootstrap_null(a, b, opt);
  r.p_value = bootstrap_p_value(null, r.t_statistic, opt.sidedness);
  return r;
}

} // namespace videc

#endif // VIDEC_STATS_HPP
