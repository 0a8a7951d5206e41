#pragma once

#include "contyp/contour.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace contyp::similarity {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetrized pairwise components: pa = max of the two standardized Procrustes
/// residuals, dc = max of the two direct compositions, gamma = 1 - min of the two
/// optimal scales. Zero diagonals.
struct ComponentMatrices {
  std::vector<std::string> ids;
  Matrix pa;
  Matrix dc;
  Matrix gamma;

  std::size_t size() const { return ids.size(); }
};

struct WeightConfig {
  double mu = 1.0;
  double lambda = 0.0;
  double omega = 0.0;
  bool use_ndc = false;
  bool use_ngamma = false;

  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

enum class Symmetrization { None, Average, Max };
enum class NormalizerMode { PerColumn, Global };

struct SimilarityMatrix {
  std::vector<std::string> ids;
  Matrix values;
  WeightConfig config;
  Symmetrization symmetrization = Symmetrization::Average;
};

struct ComponentParams {
  int resample_m = 200;
  std::optional<std::size_t> dtw_band;
};

/// OpenMP over unordered pairs. Results do not depend on the thread count.
ComponentMatrices pairwise_components(const ContourSet& set, const ComponentParams& params = {});

/// Single-threaded reference of the same computation.
ComponentMatrices pairwise_components_serial(const ContourSet& set, const ComponentParams& params = {});

/// out(j) = 1 / max_i matrix(i, j); throws naming the column when that maximum is not positive.
Vector column_normalizers(const Matrix& matrix);

/// Every entry is 1 / (global maximum).
Vector global_normalizers(const Matrix& matrix);

SimilarityMatrix assemble_sm(const ComponentMatrices& components, const WeightConfig& config,
                             Symmetrization symmetrization = Symmetrization::Average,
                             NormalizerMode mode = NormalizerMode::PerColumn);

/// PSM, DCM, SCM take no weights. WPSM uses (first, second) as (mu, omega);
/// WNDCSM and WNDCNSM use them as (lambda, omega).
WeightConfig preset(std::string_view name, double first = 0.5, double second = 0.5);

const char* to_string(Symmetrization s);
Symmetrization symmetrization_from_string(std::string_view s);

nlohmann::json to_json(const ComponentMatrices& c);
ComponentMatrices components_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WeightConfig& w);
WeightConfig weight_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimilarityMatrix& sm);
SimilarityMatrix similarity_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace contyp::similarity
