#ifndef VIDEC_MANIFEST_HPP
#define VIDEC_MANIFEST_HPP

// Run manifests and content digests of output trees.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "videc/error.hpp"
#include "videc/hash.hpp"
#include "videc/version.hpp"

namespace videc {

using nlohmann::json;

inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw DataError(DataError::Kind::io, "cannot open '" + tmp.string() + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f)
      throw DataError(DataError::Kind::io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw DataError(DataError::Kind::missing_file, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void digest_file(Fnv1a64 &h, const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw DataError(DataError::Kind::missing_file, "cannot open '" + path.string() + "'");
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(f.gcount());
    h.update(std::span(reinterpret_cast<const unsigned char *>(buf.data()), got));
  }
}

inline std::string file_digest(const std::filesystem::path &path) {
  Fnv1a64 h;
  digest_file(h, path);
  return h.hex();
}

/// Regular files under `root`, as sorted generic relative paths.
inline std::vector<std::string> tree_files(const std::filesystem::path &root) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Digest over (relative path, contents) of every file; `skip` names are excluded.
inline std::string tree_digest(const std::filesystem::path &root, const std::vector<std::string> &skip = {}) {
  if (!std::filesystem::is_directory(root))
    throw DataError(DataError::Kind::missing_file, "'" + root.string() + "' is not a directory");
  Fnv1a64 h;
  for (const auto &rel : tree_files(root)) {
    const auto name = std::filesystem::path(rel).filename().string();
    if (std::find(skip.begin(), skip.end(), name) != skip.end())
      continue;
    h.update(rel);
    h.update(std::string_view("\0", 1));
    digest_file(h, root / rel);
  }
  return h.hex();
}

struct RunManifest {
  std::string command;
  json config = json::object();
  json inputs = json::array();  // [{path (relative to the manifest), digest}]
  bool record_time = false;

  /// Records an input by path relative to `out_dir` and content digest.
  void add_input(const std::filesystem::path &in, const std::filesystem::path &out_dir) {
    namespace fs = std::filesystem;
    const auto rel = fs::weakly_canonical(in).lexically_relative(fs::weakly_canonical(out_dir));
    const std::string digest = fs::is_directory(in) ? tree_digest(in, {"manifest.json"}) : file_digest(in);
    inputs.push_back({{"path", rel.empty() ? in.generic_string() : rel.generic_string()}, {"digest", digest}});
  }

  /// Writes manifest.json listing every other file under out_dir with its digest.
  void write(const std::filesystem::path &out_dir) const {
    json outputs = json::array();
    for (const auto &rel : tree_files(out_dir)) {
      if (rel == "manifest.json")
        continue;
      outputs.push_back({{"path", rel}, {"digest", file_digest(out_dir / rel)}});
    }
    json m = {{"tool", "videc"},
              {"version", kVersion},
              {"command", command},
              {"config", config},
              {"inputs", inputs},
              {"outputs", outputs}};
    if (record_time) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      m["timestamp"] = buf;
    }
    write_file_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
  }
};

} // namespace videc

#endif // VIDEC_MANIFEST_HPP
