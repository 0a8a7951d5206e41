#pragma once

// Scratch directories and on-disk raw datasets for pipeline-level tests.

#include "contyp/io.hpp"
#include "synthetic.hpp"

#include <nlohmann/json.hpp>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace contyp::fixtures {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("contyp_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `set` as raw point CSVs plus a manifest; returns the manifest path.
inline fs::path write_raw(const ContourSet& set, const fs::path& dir) {
  fs::create_directories(dir / "raw");
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& c : set.contours) {
    const std::string name = "raw/" + io::file_stem_for_id(c.id) + ".csv";
    std::ofstream(dir / name) << io::points_to_csv(c.points);
    entries.push_back({{"id", c.id}, {"path", name}});
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream(manifest) << nlohmann::json{{"dataset_id", set.dataset_id}, {"contours", entries}}.dump(2);
  return manifest;
}

}  // namespace contyp::fixtures
