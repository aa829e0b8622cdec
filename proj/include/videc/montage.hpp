#ifndef VIDEC_MONTAGE_HPP
#define VIDEC_MONTAGE_HPP

#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "videc/dataset.hpp"

namespace videc {

namespace detail {

struct Row10_10 {
  std::string_view prefix;
  double midline_theta; // degrees from Cz along the midline, anterior positive
  double equator_azimuth; // degrees from the nasion direction of the row's "7" electrode
  int max_lateral; // lateral index that reaches the equator
};

// Rows of the extended 10-20 (10-10) grid.
inline constexpr std::array<Row10_10, 14> kRows{{
    {"Fp", 90.0, 18.0, 1},    {"AF", 67.5, 36.0, 4},  {"FT", 22.5, 72.0, 4},   {"FC", 22.5, 72.0, 4},
    {"F", 45.0, 54.0, 4},     {"TP", -22.5, 108.0, 4}, {"CP", -22.5, 108.0, 4}, {"T", 0.0, 90.0, 4},
    {"C", 0.0, 90.0, 4},      {"PO", -67.5, 144.0, 4}, {"P", -45.0, 126.0, 4},  {"O", -90.0, 162.0, 1},
    {"I", -112.5, 180.0, 1},  {"N", 112.5, 0.0, 1},
}};

struct Vec3 {
  double x, y, z;
};

inline Vec3 to_unit(double theta_deg, double az_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double az = az_deg * std::numbers::pi / 180.0;
  return {std::sin(th) * std::sin(az), std::sin(th) * std::cos(az), std::cos(th)};
}

inline Vec3 slerp(const Vec3 &a, const Vec3 &b, double f) {
  const double dot = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  const double om = std::acos(dot);
  if (om < 1e-12)
    return a;
  const double wa = std::sin((1 - f) * om) / std::sin(om);
  const double wb = std::sin(f * om) / std::sin(om);
  return {wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z};
}

} // namespace detail

/// Head-plane coordinates of a 10-10 label.
///
/// Azimuthal equidistant projection around Cz: radius = polar angle / 120 deg,
/// +x towards the right ear, +y towards the nasion. Throws on unknown labels.
inline Point2 position_10_10(std::string_view label) {
  std::string s(label);
  std::size_t split = 0;
  while (split < s.size() && std::isalpha(static_cast<unsigned char>(s[split])) && s[split] != 'z')
    ++split;
  const std::string prefix = s.substr(0, split);
  const std::string suffix = s.substr(split);
  const detail::Row10_10 *row = nullptr;
  for (const auto &r : detail::kRows) {
    if (r.prefix == prefix) {
      row = &r;
      break;
    }
  }
  if (row == nullptr || suffix.empty())
    throw ConfigError("no 10-10 position for label '" + s + "'");

  double theta = 0.0;
  double az = 0.0;
  const double mid_az = row->midline_theta >= 0 ? 0.0 : 180.0;
  if (suffix == "z") {
    theta = std::abs(row->midline_theta);
    az = mid_az;
  } else {
    const int number = std::stoi(suffix);
    if (number < 1 || number > 10)
      throw ConfigError("no 10-10 position for label '" + s + "'");
    const int lateral = (number + 1) / 2;
    if (lateral > row->max_lateral) {
      // 9/10 electrodes sit one step below the equator.
      theta = 112.5;
      az = row->equator_azimuth;
    } else {
      const auto m = detail::to_unit(std::abs(row->midline_theta), mid_az);
      const auto e = detail::to_unit(90.0, row->equator_azimuth);
      const auto p = detail::slerp(m, e, static_cast<double>(lateral) / row->max_lateral);
      theta = std::acos(std::clamp(p.z, -1.0, 1.0)) * 180.0 / std::numbers::pi;
      az = std::atan2(p.x, p.y) * 180.0 / std::numbers::pi;
    }
    if (number % 2 == 1)
      az = -az;
  }
  const double r = theta / 120.0;
  const double a = az * std::numbers::pi / 180.0;
  return {r * std::sin(a), r * std::cos(a)};
}

/// 64 data channels of an extended 10-20 cap, FCz reference and FPz ground excluded.
inline const std::vector<std::string> &standard_64_labels() {
  static const std::vector<std::string> labels{
      "Fp1", "Fz",  "F3",  "F7",  "FT9", "FC5", "FC1", "C3",  "T7",  "TP9", "CP5", "CP1", "Pz",
      "P3",  "P7",  "O1",  "Oz",  "O2",  "P4",  "P8",  "TP10", "CP6", "CP2", "Cz",  "C4",  "T8",
      "FT10", "FC6", "FC2", "F4",  "F8",  "Fp2", "AF7", "AF3", "AFz", "F1",  "F5",  "FT7", "FC3",
      "C1",  "C5",  "TP7", "CP3", "P1",  "P5",  "PO7", "PO3", "POz", "PO4", "PO8", "P6",  "P2",
      "CPz", "CP4", "TP8", "C6",  "C2",  "FC4", "FT8", "F6",  "AF8", "AF4", "F2",  "Iz"};
  return labels;
}

inline Montage standard_64_montage() {
  std::vector<Point2> pos;
  for (const auto &l : standard_64_labels())
    pos.push_back(position_10_10(l));
  return Montage(standard_64_labels(), std::move(pos), "FCz", "FPz");
}

/// First `n` channels of the standard montage.
inline Montage standard_montage_prefix(std::size_t n) {
  const auto full = standard_64_montage();
  if (n == 0 || n > full.size())
    throw ConfigError("standard montage has 64 channels; requested " + std::to_string(n));
  std::vector<std::string> names(full.channel_names().begin(), full.channel_names().begin() + n);
  std::vector<Point2> pos(full.positions().begin(), full.positions().begin() + n);
  return Montage(std::move(names), std::move(pos), full.reference_name(), full.ground_name());
}

inline std::vector<std::string> default_occipital_group() {
  return {"O1", "Oz", "O2", "PO3", "POz", "PO4", "PO7", "PO8", "Iz"};
}

inline std::vector<std::string> default_prefrontal_group() {
  return {"Fp1", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8", "F5", "F6"};
}

/// The six shape-bearing word classes analyzed by default.
inline std::vector<std::string> default_word_classes() {
  return {"ambulance", "clock", "light", "toilet", "TV", "water"};
}

} // namespace videc

#endif // VIDEC_MONTAGE_HPP
