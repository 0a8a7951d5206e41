#include "contyp/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace contyp::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_coordinate(std::string_view text, const fs::path& path, std::size_t line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw Error("non-numeric coordinate '" + t + "' in " + path.string() + " line " + std::to_string(line));
  }
  return value;
}

std::vector<Point> parse_csv(const std::string& text, const fs::path& path) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!header_seen) {
      std::string h = trim(line);
      h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
      if (h != "x,y") throw Error("bad CSV header in " + path.string() + " (expected 'x,y')");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error("malformed row in " + path.string() + " line " + std::to_string(lineno));
    }
    pts.push_back({parse_coordinate(std::string_view(line).substr(0, comma), path, lineno),
                   parse_coordinate(std::string_view(line).substr(comma + 1), path, lineno)});
  }
  if (!header_seen) throw Error("empty CSV " + path.string());
  return pts;
}

std::vector<Point> parse_json_points(const std::string& text, const fs::path& path) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.contains("points") || !doc["points"].is_array()) {
    throw Error("JSON point file " + path.string() + " lacks a 'points' array");
  }
  std::vector<Point> pts;
  for (const auto& row : doc["points"]) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
      throw Error("non-numeric coordinate in " + path.string());
    }
    pts.push_back({row[0].get<double>(), row[1].get<double>()});
  }
  return pts;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Point> read_points(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing contour file: " + path.string());
  const std::string text = read_file(path);
  return path.extension() == ".json" ? parse_json_points(text, path) : parse_csv(text, path);
}

ContourSet load_contour_set(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw Error("missing manifest: " + manifest_path.string());
  json doc;
  try {
    doc = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw Error("invalid manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!doc.contains("contours") || !doc["contours"].is_array()) {
    throw Error("manifest " + manifest_path.string() + " lacks a 'contours' array");
  }

  ContourSet set;
  set.dataset_id = doc.value("dataset_id", manifest_path.stem().string());
  const fs::path base = manifest_path.parent_path();
  std::set<std::string> seen;
  for (const auto& entry : doc["contours"]) {
    Contour c;
    c.id = entry.at("id").get<std::string>();
    if (!seen.insert(c.id).second) throw Error("duplicate id '" + c.id + "' in manifest");
    const fs::path rel = entry.at("path").get<std::string>();
    c.points = read_points(rel.is_absolute() ? rel : base / rel);
    if (c.points.size() < 2) {
      throw Error("degenerate contour '" + c.id + "': " + std::to_string(c.points.size()) + " point(s)");
    }
    if (entry.contains("radius") && entry["radius"].is_number()) c.radius = entry["radius"].get<double>();
    if (entry.contains("source") && entry["source"].is_object()) {
      const auto& src = entry["source"];
      if (src.value("kind", "original") == "augmented") {
        c.source.transform_id = src.value("transform_id", "");
        c.source.parent_id = src.value("parent_id", "");
      }
    }
    set.contours.push_back(std::move(c));
  }
  return set;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string points_to_csv(std::span<const Point> pts) {
  std::string out = "x,y\n";
  for (const auto& p : pts) {
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

std::string file_stem_for_id(std::string_view id) {
  std::string out;
  for (char ch : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += safe ? ch : '_';
  }
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_contour_set(const ContourSet& set, const fs::path& dir, std::string_view config_hash) {
  json manifest;
  manifest["dataset_id"] = set.dataset_id;
  if (!config_hash.empty()) manifest["config_hash"] = config_hash;
  manifest["contours"] = json::array();
  std::set<std::string> stems;
  for (std::size_t i = 0; i < set.contours.size(); ++i) {
    const auto& c = set.contours[i];
    std::string stem = file_stem_for_id(c.id);
    if (!stems.insert(stem).second) stem += "_" + std::to_string(i);
    const std::string rel = "contours/" + stem + ".csv";
    write_file_atomic(dir / rel, points_to_csv(c.points));

    json entry{{"id", c.id}, {"path", rel}};
    if (c.radius) entry["radius"] = *c.radius;
    if (c.source.is_original()) {
      entry["source"] = {{"kind", "original"}};
    } else {
      entry["source"] = {{"kind", "augmented"},
                         {"transform_id", c.source.transform_id},
                         {"parent_id", c.source.parent_id}};
    }
    manifest["contours"].push_back(std::move(entry));
  }
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace contyp::io
