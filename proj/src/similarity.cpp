#include "contyp/similarity.hpp"

#include "contyp/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace contyp::similarity {

using nlohmann::json;

namespace {

struct PairComponents {
  double pa = 0.0;
  double dc = 0.0;
  double gamma = 0.0;
};

PairComponents compute_pair(const Contour& a, const Contour& b, const metrics::DtwOptions& dtw_opts) {
  const auto ab = metrics::procrustes(a.points, b.points);
  const auto ba = metrics::procrustes(b.points, a.points);
  PairComponents out;
  out.pa = std::max(ab.d, ba.d);
  out.dc = std::max(metrics::direct_composition(a.points, ab, dtw_opts),
                    metrics::direct_composition(b.points, ba, dtw_opts));
  out.gamma = std::max(0.0, 1.0 - std::min(ab.gamma_star, ba.gamma_star));
  return out;
}

void check_set(const ContourSet& set, const ComponentParams& params) {
  if (set.size() < 2) throw Error("need n >= 2 contours, got " + std::to_string(set.size()));
  if (params.resample_m < 2) throw Error("resample count must be >= 2");
}

ComponentMatrices empty_components(const ContourSet& set) {
  const auto n = static_cast<Eigen::Index>(set.size());
  ComponentMatrices out;
  for (const auto& c : set.contours) out.ids.push_back(c.id);
  out.pa = Matrix::Zero(n, n);
  out.dc = Matrix::Zero(n, n);
  out.gamma = Matrix::Zero(n, n);
  return out;
}

void store(ComponentMatrices& out, std::size_t i, std::size_t j, const PairComponents& p) {
  const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
  out.pa(a, b) = out.pa(b, a) = p.pa;
  out.dc(a, b) = out.dc(b, a) = p.dc;
  out.gamma(a, b) = out.gamma(b, a) = p.gamma;
}

std::string pair_label(const ContourSet& set, std::size_t i, std::size_t j) {
  return "(" + set.contours[i].id + ", " + set.contours[j].id + ")";
}

}  // namespace

ComponentMatrices pairwise_components_serial(const ContourSet& set, const ComponentParams& params) {
  check_set(set, params);
  const std::size_t n = set.size();
  std::vector<Contour> resampled;
  resampled.reserve(n);
  for (const auto& c : set.contours) resampled.push_back(resample_arclength(c, params.resample_m));

  const metrics::DtwOptions dtw_opts{params.dtw_band};
  auto out = empty_components(set);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        store(out, i, j, compute_pair(resampled[i], resampled[j], dtw_opts));
      } catch (const std::exception& e) {
        throw Error("pair " + pair_label(set, i, j) + ": " + e.what());
      }
    }
  }
  return out;
}

ComponentMatrices pairwise_components(const ContourSet& set, const ComponentParams& params) {
  check_set(set, params);
  const std::size_t n = set.size();
  const auto count = static_cast<std::ptrdiff_t>(n);

  std::vector<Contour> resampled(n);
  std::mutex err_mutex;
  std::ptrdiff_t first_failure = std::numeric_limits<std::ptrdiff_t>::max();
  std::string failure;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      resampled[i] = resample_arclength(set.contours[i], params.resample_m);
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      if (i < first_failure) {
        first_failure = i;
        failure = e.what();
      }
    }
  }
  if (!failure.empty()) throw Error(failure);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  const metrics::DtwOptions dtw_opts{params.dtw_band};
  auto out = empty_components(set);
  const auto npairs = static_cast<std::ptrdiff_t>(pairs.size());

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t p = 0; p < npairs; ++p) {
    const auto [i, j] = pairs[p];
    try {
      // Each pair owns the (i, j) and (j, i) cells; no two iterations write the same cell.
      store(out, i, j, compute_pair(resampled[i], resampled[j], dtw_opts));
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      if (p < first_failure) {
        first_failure = p;
        failure = "pair " + pair_label(set, i, j) + ": " + e.what();
      }
    }
  }
  if (!failure.empty()) throw Error(failure);
  return out;
}

Vector column_normalizers(const Matrix& matrix) {
  Vector out(matrix.cols());
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const double mx = matrix.col(j).maxCoeff();
    if (!(mx > 0.0)) throw Error("zero column maximum in column " + std::to_string(j) + "; normalizer undefined");
    out(j) = 1.0 / mx;
  }
  return out;
}

Vector global_normalizers(const Matrix& matrix) {
  const double mx = matrix.size() > 0 ? matrix.maxCoeff() : 0.0;
  if (!(mx > 0.0)) throw Error("zero global maximum; normalizer undefined");
  return Vector::Constant(matrix.cols(), 1.0 / mx);
}

SimilarityMatrix assemble_sm(const ComponentMatrices& components, const WeightConfig& config,
                             Symmetrization symmetrization, NormalizerMode mode) {
  for (double w : {config.mu, config.lambda, config.omega}) {
    if (!std::isfinite(w)) throw Error("weights must be finite");
  }
  const auto n = static_cast<Eigen::Index>(components.size());
  auto normalizers = [&](const Matrix& m, bool enabled) -> Vector {
    if (!enabled) return Vector::Ones(n);
    return mode == NormalizerMode::PerColumn ? column_normalizers(m) : global_normalizers(m);
  };
  const Vector ndc = normalizers(components.dc, config.use_ndc);
  const Vector ngamma = normalizers(components.gamma, config.use_ngamma);

  Matrix raw(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      raw(i, j) = config.mu * components.pa(i, j) + config.lambda * ndc(j) * components.dc(i, j) +
                  config.omega * ngamma(j) * components.gamma(i, j);
    }
  }

  SimilarityMatrix sm{components.ids, Matrix(n, n), config, symmetrization};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      switch (symmetrization) {
        case Symmetrization::None: sm.values(i, j) = raw(i, j); break;
        case Symmetrization::Average: sm.values(i, j) = (raw(i, j) + raw(j, i)) / 2.0; break;
        case Symmetrization::Max: sm.values(i, j) = std::max(raw(i, j), raw(j, i)); break;
      }
    }
    sm.values(i, i) = 0.0;
  }
  return sm;
}

WeightConfig preset(std::string_view name, double first, double second) {
  if (name == "PSM") return {1.0, 0.0, 0.0, false, false};
  if (name == "DCM") return {0.0, 1.0, 0.0, false, false};
  if (name == "SCM") return {0.0, 0.0, 1.0, false, false};
  if (!std::isfinite(first) || !std::isfinite(second)) throw Error("preset weights must be finite");
  if (name == "WPSM") return {first, 0.0, second, false, false};
  if (name == "WNDCSM") return {0.0, first, second, true, false};
  if (name == "WNDCNSM") return {0.0, first, second, true, true};
  throw Error("unknown preset '" + std::string(name) + "'");
}

const char* to_string(Symmetrization s) {
  switch (s) {
    case Symmetrization::None: return "none";
    case Symmetrization::Average: return "average";
    case Symmetrization::Max: return "max";
  }
  return "?";
}

Symmetrization symmetrization_from_string(std::string_view s) {
  if (s == "none") return Symmetrization::None;
  if (s == "average") return Symmetrization::Average;
  if (s == "max") return Symmetrization::Max;
  throw Error("unknown symmetrization '" + std::string(s) + "'");
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error("matrix must be an array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw Error("matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error("matrix entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json to_json(const ComponentMatrices& c) {
  return json{{"ids", c.ids}, {"pa", matrix_to_json(c.pa)}, {"dc", matrix_to_json(c.dc)},
              {"gamma", matrix_to_json(c.gamma)}};
}

ComponentMatrices components_from_json(const json& j) {
  ComponentMatrices c;
  c.ids = j.at("ids").get<std::vector<std::string>>();
  c.pa = matrix_from_json(j.at("pa"));
  c.dc = matrix_from_json(j.at("dc"));
  c.gamma = matrix_from_json(j.at("gamma"));
  const auto n = static_cast<Eigen::Index>(c.ids.size());
  if (c.pa.rows() != n || c.dc.rows() != n || c.gamma.rows() != n) {
    throw Error("component matrices do not match the id list");
  }
  return c;
}

json to_json(const WeightConfig& w) {
  return json{{"mu", w.mu}, {"lambda", w.lambda}, {"omega", w.omega}, {"ndc", w.use_ndc}, {"ngamma", w.use_ngamma}};
}

WeightConfig weight_config_from_json(const json& j) {
  if (j.contains("preset")) {
    return preset(j["preset"].get<std::string>(), j.value("first", 0.5), j.value("second", 0.5));
  }
  WeightConfig w;
  w.mu = j.value("mu", 0.0);
  w.lambda = j.value("lambda", 0.0);
  w.omega = j.value("omega", 0.0);
  w.use_ndc = j.value("ndc", false);
  w.use_ngamma = j.value("ngamma", false);
  return w;
}

json to_json(const SimilarityMatrix& sm) {
  return json{{"ids", sm.ids},
              {"config", to_json(sm.config)},
              {"symmetrization", to_string(sm.symmetrization)},
              {"values", matrix_to_json(sm.values)}};
}

SimilarityMatrix similarity_from_json(const json& j) {
  SimilarityMatrix sm;
  sm.ids = j.at("ids").get<std::vector<std::string>>();
  sm.values = matrix_from_json(j.at("values"));
  if (j.contains("config")) sm.config = weight_config_from_json(j["config"]);
  sm.symmetrization = symmetrization_from_string(j.value("symmetrization", "average"));
  if (sm.values.rows() != static_cast<Eigen::Index>(sm.ids.size())) throw Error("matrix does not match the id list");
  return sm;
}

}  // namespace contyp::similarity
