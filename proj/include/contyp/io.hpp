#pragma once

#include "contyp/contour.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace contyp::io {

namespace fs = std::filesystem;

/// Reads a point file: CSV with an `x,y` header, or JSON {"id":..., "points":[[x,y],...]}.
/// The format is chosen by extension (.json), anything else is parsed as CSV.
std::vector<Point> read_points(const fs::path& path);

/// Manifest JSON {"dataset_id":..., "contours":[{"id":..., "path":...}, ...]}.
/// Paths are resolved relative to the manifest's directory. No normalization is applied.
ContourSet load_contour_set(const fs::path& manifest_path);

/// Writes one CSV per contour under `dir/contours/` and `dir/manifest.json`,
/// recording provenance and radius for each entry, plus `config_hash` when given.
void write_contour_set(const ContourSet& set, const fs::path& dir, std::string_view config_hash = {});

std::string points_to_csv(std::span<const Point> pts);

/// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const fs::path& path, std::string_view contents);

std::string read_file(const fs::path& path);

/// Contour ids are free text; this maps them to a filesystem-safe stem.
std::string file_stem_for_id(std::string_view id);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace contyp::io
