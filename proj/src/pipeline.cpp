#include "contyp/pipeline.hpp"

#include "contyp/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <memory>

namespace contyp::pipeline {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const PreprocessParams& p) {
  json j{{"window", p.window}, {"order", p.order}, {"resample_m", p.resample_m}, {"flip_y", p.flip_y}};
  j["eps_pos"] = p.eps_pos ? json(*p.eps_pos) : json(nullptr);
  return j;
}

PreprocessParams preprocess_params_from_json(const json& j) {
  PreprocessParams p;
  p.window = j.value("window", p.window);
  p.order = j.value("order", p.order);
  p.resample_m = j.value("resample_m", p.resample_m);
  p.flip_y = j.value("flip_y", p.flip_y);
  if (j.contains("eps_pos") && j["eps_pos"].is_number()) p.eps_pos = j["eps_pos"].get<double>();
  return p;
}

fs::path resolve_output_dir(const std::optional<fs::path>& explicit_dir, const fs::path& fallback) {
  if (explicit_dir) return *explicit_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return fallback;
}

namespace {

std::string dataset_digest(const ContourSet& set) {
  std::string blob = set.dataset_id + "\n";
  for (const auto& c : set.contours) {
    blob += c.id + "\n" + io::points_to_csv(c.points);
  }
  return sha256_hex(blob);
}

json report_to_json(const ValidationReport& r) {
  json v = json::array();
  for (const auto& viol : r.violations) {
    v.push_back(json{{"assumption", to_string(viol.assumption)},
                     {"measured", viol.measured},
                     {"tolerance", viol.tolerance}});
  }
  return json{{"id", r.contour_id}, {"violations", std::move(v)}};
}

json component_params_json(const similarity::ComponentParams& p) {
  json j{{"resample_m", p.resample_m}};
  j["dtw_band"] = p.dtw_band ? json(*p.dtw_band) : json(nullptr);
  return j;
}

}  // namespace

PreprocessOutcome run_preprocess(const fs::path& manifest, const fs::path& out_dir, const PreprocessParams& params) {
  const ContourSet raw = io::load_contour_set(manifest);
  PreprocessOutcome out;
  out.set.dataset_id = raw.dataset_id;
  for (const auto& c : raw.contours) {
    auto [normalized, report] = preprocess(c, params);
    out.set.contours.push_back(std::move(normalized));
    out.reports.push_back(std::move(report));
  }
  out.config_hash = sha256_hex(dump(json{{"stage", "preprocess"},
                                         {"input", dataset_digest(raw)},
                                         {"params", to_json(params)}}));

  io::write_contour_set(out.set, out_dir, out.config_hash);
  json config{{"config_hash", out.config_hash}, {"dataset_id", out.set.dataset_id},
              {"preprocess", to_json(params)}};
  io::write_file_atomic(out_dir / "config.json", dump(config));

  json reports = json::array();
  for (const auto& r : out.reports) reports.push_back(report_to_json(r));
  io::write_file_atomic(out_dir / kValidation, dump(json{{"config_hash", out.config_hash}, {"reports", reports}}));
  return out;
}

similarity::ComponentMatrices load_components(const fs::path& path, std::string* config_hash) {
  if (!fs::exists(path)) throw Error("missing components file " + path.string() + "; run `contyp components` first");
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("invalid components file " + path.string() + ": " + e.what());
  }
  if (config_hash) *config_hash = doc.value("config_hash", "");
  return similarity::components_from_json(doc);
}

ComponentsOutcome run_components(const fs::path& dataset_dir, const similarity::ComponentParams& params,
                                 bool parallel) {
  const ContourSet set = io::load_contour_set(dataset_dir / kManifest);
  if (set.size() < 2) throw Error("need n >= 2 contours, got " + std::to_string(set.size()));

  ComponentsOutcome out;
  out.config_hash = sha256_hex(dump(json{{"stage", "components"},
                                         {"input", dataset_digest(set)},
                                         {"params", component_params_json(params)}}));

  const fs::path target = dataset_dir / kComponents;
  if (fs::exists(target)) {
    std::string stored;
    try {
      auto cached = load_components(target, &stored);
      if (stored == out.config_hash) {
        out.components = std::move(cached);
        out.reused_cache = true;
        return out;
      }
    } catch (const Error&) {
      // unreadable cache: recompute below
    }
  }

  out.components = parallel ? similarity::pairwise_components(set, params)
                            : similarity::pairwise_components_serial(set, params);
  json doc = similarity::to_json(out.components);
  doc["config_hash"] = out.config_hash;
  doc["dataset_id"] = set.dataset_id;
  doc["params"] = component_params_json(params);
  io::write_file_atomic(target, dump(doc));
  return out;
}

ClusterOutcome cluster_components(const similarity::ComponentMatrices& components,
                                  const similarity::WeightConfig& weights, clustering::Linkage linkage,
                                  similarity::Symmetrization symmetrization) {
  ClusterOutcome out;
  out.sm = similarity::assemble_sm(components, weights, symmetrization);
  if (symmetrization == similarity::Symmetrization::None &&
      (out.sm.values.array() != out.sm.values.transpose().array()).any()) {
    // Clustering needs a symmetric matrix; an unsymmetrized SM is only useful for inspection.
    throw Error("similarity matrix is not symmetric; choose 'average' or 'max' symmetrization to cluster");
  }
  out.dendrogram = clustering::linkage(out.sm, linkage);
  if (components.size() >= 3) {
    try {
      out.ccf = clustering::cophenetic_coefficient(out.sm.values, out.dendrogram);
    } catch (const Error&) {
      out.ccf.reset();
    }
  }
  return out;
}

ClusterOutcome run_cluster(const fs::path& components_path, const similarity::WeightConfig& weights,
                           clustering::Linkage linkage, similarity::Symmetrization symmetrization,
                           const fs::path& out_dir) {
  std::string upstream;
  const auto components = load_components(components_path, &upstream);
  auto out = cluster_components(components, weights, linkage, symmetrization);
  out.config_hash = sha256_hex(dump(json{{"stage", "cluster"},
                                         {"components", upstream},
                                         {"weights", similarity::to_json(weights)},
                                         {"linkage", clustering::to_string(linkage)},
                                         {"symmetrization", similarity::to_string(symmetrization)}}));

  json sm = similarity::to_json(out.sm);
  sm["config_hash"] = out.config_hash;
  json dend = clustering::to_json(out.dendrogram);
  dend["config_hash"] = out.config_hash;
  dend["linkage"] = clustering::to_string(linkage);
  json report{{"config_hash", out.config_hash},
              {"weights", similarity::to_json(weights)},
              {"linkage", clustering::to_string(linkage)},
              {"symmetrization", similarity::to_string(symmetrization)},
              {"ccf", out.ccf ? json(*out.ccf) : json(nullptr)}};

  io::write_file_atomic(out_dir / kSimilarity, dump(sm));
  io::write_file_atomic(out_dir / kDendrogram, dump(dend));
  io::write_file_atomic(out_dir / kReport, dump(report));
  return out;
}

ContourSet run_augment(const fs::path& dataset_dir, double magnitude, const fs::path& out_dir) {
  const ContourSet set = io::load_contour_set(dataset_dir / kManifest);
  ContourSet augmented = augmentation::augment_set(set, magnitude);
  const std::string hash = sha256_hex(dump(json{{"stage", "augment"},
                                                {"input", dataset_digest(set)},
                                                {"magnitude", magnitude}}));
  io::write_contour_set(augmented, out_dir, hash);
  return augmented;
}

clustering::Labeling run_cut(const fs::path& dendrogram_path, const clustering::CutSpec& spec) {
  json doc;
  try {
    doc = json::parse(io::read_file(dendrogram_path));
  } catch (const json::parse_error& e) {
    throw Error("invalid dendrogram file " + dendrogram_path.string() + ": " + e.what());
  }
  return clustering::cut(clustering::dendrogram_from_json(doc), spec);
}

clustering::Agreement run_agreement(const fs::path& labels_csv, const fs::path& reference_csv) {
  return clustering::agreement(clustering::labels_from_csv(io::read_file(labels_csv)),
                               clustering::labels_from_csv(io::read_file(reference_csv)));
}

}  // namespace contyp::pipeline
