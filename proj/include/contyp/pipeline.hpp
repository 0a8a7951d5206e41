#pragma once

#include "contyp/augmentation.hpp"
#include "contyp/clustering.hpp"
#include "contyp/contour.hpp"
#include "contyp/similarity.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace contyp::pipeline {

namespace fs = std::filesystem;

/// Default output directory when none is given on the command line.
inline constexpr const char* kOutputDirEnv = "CONTYP_OUTPUT_DIR";

// File names inside a dataset directory.
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kValidation = "validation.json";
inline constexpr const char* kComponents = "components.json";
inline constexpr const char* kSimilarity = "sm.json";
inline constexpr const char* kDendrogram = "dendrogram.json";
inline constexpr const char* kReport = "report.json";

struct PipelineConfig {
  PreprocessParams preprocess;
  similarity::ComponentParams components;
  similarity::WeightConfig weights;
  clustering::Linkage linkage = clustering::Linkage::Average;
  similarity::Symmetrization symmetrization = similarity::Symmetrization::Average;
  fs::path output_dir;
};

std::string sha256_hex(std::string_view data);

nlohmann::json to_json(const PreprocessParams& p);
PreprocessParams preprocess_params_from_json(const nlohmann::json& j);

/// `explicit_dir` if set, else $CONTYP_OUTPUT_DIR, else `fallback`.
fs::path resolve_output_dir(const std::optional<fs::path>& explicit_dir, const fs::path& fallback);

struct PreprocessOutcome {
  ContourSet set;
  std::vector<ValidationReport> reports;
  std::string config_hash;
};

/// Loads, smooths and normalizes every contour in the manifest and writes the
/// normalized dataset plus validation reports to `out_dir`. Assumption
/// violations are reported, never fatal.
PreprocessOutcome run_preprocess(const fs::path& manifest, const fs::path& out_dir, const PreprocessParams& params);

struct ComponentsOutcome {
  similarity::ComponentMatrices components;
  std::string config_hash;
  bool reused_cache = false;
};

/// Computes (or reuses, when the stored hash matches) dataset_dir/components.json.
ComponentsOutcome run_components(const fs::path& dataset_dir, const similarity::ComponentParams& params,
                                 bool parallel = true);

/// Reads a components file written by run_components.
similarity::ComponentMatrices load_components(const fs::path& path, std::string* config_hash = nullptr);

struct ClusterOutcome {
  similarity::SimilarityMatrix sm;
  clustering::Dendrogram dendrogram;
  std::optional<double> ccf;  // absent for n < 3
  std::string config_hash;
};

ClusterOutcome cluster_components(const similarity::ComponentMatrices& components,
                                  const similarity::WeightConfig& weights, clustering::Linkage linkage,
                                  similarity::Symmetrization symmetrization);

/// Writes sm.json, dendrogram.json and report.json into `out_dir`.
ClusterOutcome run_cluster(const fs::path& components_path, const similarity::WeightConfig& weights,
                           clustering::Linkage linkage, similarity::Symmetrization symmetrization,
                           const fs::path& out_dir);

/// Writes the augmented dataset (manifest + CSVs with provenance) into `out_dir`.
ContourSet run_augment(const fs::path& dataset_dir, double magnitude, const fs::path& out_dir);

clustering::Labeling run_cut(const fs::path& dendrogram_path, const clustering::CutSpec& spec);

clustering::Agreement run_agreement(const fs::path& labels_csv, const fs::path& reference_csv);

/// Canonical serialization used for every JSON artifact (2-space indent, trailing newline).
std::string dump(const nlohmann::json& j);

}  // namespace contyp::pipeline
