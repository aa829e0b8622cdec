#ifndef VIDEC_BTD_IO_HPP
#define VIDEC_BTD_IO_HPP

// BCI Trial Directory (BTD) layout.
//
//   meta.json     fs, n_channels, n_samples, channel_names, reference, ground, positions
//   data.f32le    row-major channels x samples, float32 little-endian, microvolts
//   events.csv    "onset_sample,label" header, one row per event, LF endings
//
// Epoch sets use the same directory idea with epochs.f32le (trial-major
// trials x channels x samples) and labels.csv ("label" header). Their
// meta.json additionally carries n_trials, t0 and class_set.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "videc/dataset.hpp"

namespace videc {

namespace btd {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char *kMeta = "meta.json";
inline constexpr const char *kData = "data.f32le";
inline constexpr const char *kEvents = "events.csv";
inline constexpr const char *kEpochs = "epochs.f32le";
inline constexpr const char *kLabels = "labels.csv";

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

inline void write_text(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError(DataError::Kind::io, "cannot open '" + p.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw DataError(DataError::Kind::io, "write failed for '" + p.string() + "'");
}

inline std::string read_text(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw DataError(DataError::Kind::missing_file, "missing file '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes float32 LE values produced by `at(i)` for i in [0, n).
template <typename Source>
void write_f32(const fs::path &p, std::size_t n, Source at) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError(DataError::Kind::io, "cannot open '" + p.string() + "' for writing");
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<std::uint32_t> buf;
  buf.reserve(kChunk);
  for (std::size_t i = 0; i < n;) {
    buf.clear();
    for (std::size_t j = 0; j < kChunk && i < n; ++j, ++i)
      buf.push_back(to_le(std::bit_cast<std::uint32_t>(static_cast<float>(at(i)))));
    out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  }
  if (!out)
    throw DataError(DataError::Kind::io, "write failed for '" + p.string() + "'");
}

/// Reads exactly `n` float32 LE values into `dst`.
inline void read_f32(const fs::path &p, float *dst, std::size_t n) {
  std::error_code ec;
  if (!fs::exists(p, ec))
    throw DataError(DataError::Kind::missing_file, "missing file '" + p.string() + "'");
  const auto bytes = fs::file_size(p, ec);
  if (ec)
    throw DataError(DataError::Kind::io, "cannot stat '" + p.string() + "'");
  if (bytes != n * 4)
    throw DataError(DataError::Kind::dimension_mismatch,
                    "'" + p.string() + "' holds " + std::to_string(bytes / 4) + " values (" +
                        std::to_string(bytes) + " bytes) but metadata implies " + std::to_string(n));
  std::ifstream in(p, std::ios::binary);
  in.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n * 4));
  if (!in)
    throw DataError(DataError::Kind::io, "read failed for '" + p.string() + "'");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u;
      std::memcpy(&u, dst + i, 4);
      u = to_le(u);
      std::memcpy(dst + i, &u, 4);
    }
  }
}

inline json read_meta(const fs::path &dir) {
  try {
    return json::parse(read_text(dir / kMeta));
  } catch (const json::exception &e) {
    throw DataError(DataError::Kind::malformed, "malformed meta.json in '" + dir.string() + "': " + e.what());
  }
}

template <typename T>
T meta_get(const json &meta, const char *key) {
  if (!meta.contains(key))
    throw DataError(DataError::Kind::malformed, std::string("meta.json lacks key '") + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception &e) {
    throw DataError(DataError::Kind::malformed, std::string("meta.json key '") + key + "': " + e.what());
  }
}

inline std::vector<std::string> csv_lines(const std::string &text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!line.empty())
      lines.push_back(line);
  }
  return lines;
}

inline void check_label(const std::string &label) {
  if (label.empty() || label.find_first_of(",\n\r") != std::string::npos)
    throw ConfigError("label '" + label + "' is empty or contains a comma/newline");
}

inline json positions_json(const std::vector<Point2> &pos) {
  json arr = json::array();
  for (const auto &p : pos)
    arr.push_back({p.x, p.y});
  return arr;
}

inline std::vector<Point2> positions_from(const json &meta) {
  std::vector<Point2> out;
  if (!meta.contains("positions"))
    return out;
  for (const auto &p : meta.at("positions")) {
    if (!p.is_array() || p.size() != 2)
      throw DataError(DataError::Kind::malformed, "meta.json positions must be [x, y] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

} // namespace btd

inline void save_recording(const RawRecording &rec, const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw DataError(DataError::Kind::io, "cannot create '" + dir.string() + "': " + ec.message());

  btd::json meta;
  meta["fs"] = rec.fs();
  meta["n_channels"] = rec.n_channels();
  meta["n_samples"] = rec.n_samples();
  meta["channel_names"] = rec.montage().channel_names();
  meta["reference"] = rec.montage().reference_name();
  meta["ground"] = rec.montage().ground_name();
  meta["positions"] = btd::positions_json(rec.montage().positions());
  btd::write_text(dir / btd::kMeta, meta.dump(2) + "\n");

  const float *p = rec.data().data();
  btd::write_f32(dir / btd::kData, rec.n_channels() * rec.n_samples(), [p](std::size_t i) { return p[i]; });

  std::string events = "onset_sample,label\n";
  for (const auto &e : rec.events()) {
    btd::check_label(e.label);
    events += std::to_string(e.onset_sample) + "," + e.label + "\n";
  }
  btd::write_text(dir / btd::kEvents, events);
}

inline RawRecording load_recording(const std::filesystem::path &dir) {
  const auto meta = btd::read_meta(dir);
  const auto fs = btd::meta_get<double>(meta, "fs");
  const auto n_ch = btd::meta_get<std::size_t>(meta, "n_channels");
  const auto n_s = btd::meta_get<std::size_t>(meta, "n_samples");
  auto names = btd::meta_get<std::vector<std::string>>(meta, "channel_names");
  if (names.size() != n_ch)
    throw DataError(DataError::Kind::dimension_mismatch,
                    "meta.json lists " + std::to_string(names.size()) + " channel names but n_channels is " +
                        std::to_string(n_ch));
  auto positions = btd::positions_from(meta);
  auto reference = meta.value("reference", std::string{});
  auto ground = meta.value("ground", std::string{});

  RowMatrixXf data(static_cast<Eigen::Index>(n_ch), static_cast<Eigen::Index>(n_s));
  btd::read_f32(dir / btd::kData, data.data(), n_ch * n_s);
  if (!data.allFinite())
    throw DataError(DataError::Kind::non_finite, "'" + (dir / btd::kData).string() + "' contains non-finite values");

  std::vector<Event> events;
  const auto lines = btd::csv_lines(btd::read_text(dir / btd::kEvents));
  if (lines.empty() || lines.front() != "onset_sample,label")
    throw DataError(DataError::Kind::malformed, "events.csv must start with header 'onset_sample,label'");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos)
      throw DataError(DataError::Kind::malformed, "events.csv line " + std::to_string(i + 1) + " lacks a comma");
    Event e;
    try {
      std::size_t used = 0;
      e.onset_sample = std::stoll(lines[i].substr(0, comma), &used);
      if (used != comma)
        throw std::invalid_argument("trailing characters");
    } catch (const std::exception &) {
      throw DataError(DataError::Kind::malformed, "events.csv line " + std::to_string(i + 1) + ": bad onset");
    }
    e.label = lines[i].substr(comma + 1);
    events.push_back(std::move(e));
  }

  try {
    return RawRecording(std::move(data), fs, Montage(std::move(names), std::move(positions), reference, ground),
                        std::move(events));
  } catch (const ConfigError &e) {
    throw DataError(DataError::Kind::malformed, std::string("invalid recording metadata: ") + e.what());
  }
}

/// Writes an epoch set. Samples are narrowed to float32, so the round trip is
/// exact only for float-representable values.
inline void save_epochs(const EpochSet &e, const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw DataError(DataError::Kind::io, "cannot create '" + dir.string() + "': " + ec.message());

  btd::json meta;
  meta["fs"] = e.fs();
  meta["n_trials"] = e.n_trials();
  meta["n_channels"] = e.n_channels();
  meta["n_samples"] = e.n_samples();
  meta["t0"] = e.t0();
  meta["channel_names"] = e.channel_names();
  meta["class_set"] = e.class_set();
  if (!e.positions().empty())
    meta["positions"] = btd::positions_json(e.positions());
  btd::write_text(dir / btd::kMeta, meta.dump(2) + "\n");

  const double *p = e.data().data();
  btd::write_f32(dir / btd::kEpochs, e.data().size(), [p](std::size_t i) { return p[i]; });

  std::string labels = "label\n";
  for (const auto &l : e.labels()) {
    btd::check_label(l);
    labels += l + "\n";
  }
  btd::write_text(dir / btd::kLabels, labels);
}

inline EpochSet load_epochs(const std::filesystem::path &dir) {
  const auto meta = btd::read_meta(dir);
  const auto fs = btd::meta_get<double>(meta, "fs");
  const auto t0 = btd::meta_get<double>(meta, "t0");
  const EpochSet::Shape shape{btd::meta_get<std::size_t>(meta, "n_trials"),
                              btd::meta_get<std::size_t>(meta, "n_channels"),
                              btd::meta_get<std::size_t>(meta, "n_samples")};
  auto names = btd::meta_get<std::vector<std::string>>(meta, "channel_names");
  auto classes = btd::meta_get<std::vector<std::string>>(meta, "class_set");
  auto positions = btd::positions_from(meta);

  const std::size_t n = shape.trials * shape.channels * shape.samples;
  std::vector<float> raw(n);
  btd::read_f32(dir / btd::kEpochs, raw.data(), n);
  std::vector<double> data(raw.begin(), raw.end());

  const auto lines = btd::csv_lines(btd::read_text(dir / btd::kLabels));
  if (lines.empty() || lines.front() != "label")
    throw DataError(DataError::Kind::malformed, "labels.csv must start with header 'label'");
  std::vector<std::string> labels(lines.begin() + 1, lines.end());
  if (labels.size() != shape.trials)
    throw DataError(DataError::Kind::dimension_mismatch,
                    "labels.csv has " + std::to_string(labels.size()) + " rows for " +
                        std::to_string(shape.trials) + " trials");
  try {
    return EpochSet(std::move(data), shape, fs, t0, std::move(labels), std::move(names), std::move(classes),
                    std::move(positions));
  } catch (const ConfigError &e) {
    throw DataError(DataError::Kind::malformed, std::string("invalid epoch metadata: ") + e.what());
  }
}

/// Montage file: {"channel_names", "positions", "reference", "ground"}.
inline void save_montage(const Montage &m, const std::filesystem::path &path) {
  btd::json j;
  j["channel_names"] = m.channel_names();
  j["positions"] = btd::positions_json(m.positions());
  j["reference"] = m.reference_name();
  j["ground"] = m.ground_name();
  btd::write_text(path, j.dump(2) + "\n");
}

inline Montage load_montage(const std::filesystem::path &path) {
  btd::json j;
  try {
    j = btd::json::parse(btd::read_text(path));
  } catch (const btd::json::exception &e) {
    throw DataError(DataError::Kind::malformed, "malformed montage file '" + path.string() + "': " + e.what());
  }
  return Montage(btd::meta_get<std::vector<std::string>>(j, "channel_names"), btd::positions_from(j),
                 btd::meta_get<std::string>(j, "reference"), btd::meta_get<std::string>(j, "ground"));
}

} // namespace videc

#endif // VIDEC_BTD_IO_HPP
