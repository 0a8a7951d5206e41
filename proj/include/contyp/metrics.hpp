#pragma once

#include "contyp/contour.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace contyp::metrics {

/// Index pairs (n, m), 0-based, from (0, 0) to (N-1, M-1).
struct WarpingPath {
  std::vector<std::pair<std::size_t, std::size_t>> steps;
};

struct DtwResult {
  double cost = 0.0;
  WarpingPath path;
};

/// True if `path` is a valid (N, M)-warping path: boundary, monotonicity and
/// unit step conditions.
bool is_admissible(const WarpingPath& path, std::size_t n, std::size_t m);

/// Sum of Euclidean local costs along `path`.
double path_cost(std::span<const Point> x, std::span<const Point> y, const WarpingPath& path);

struct DtwOptions {
  /// Sakoe-Chiba half width in cells along the scaled diagonal; unset means unconstrained.
  std::optional<std::size_t> band;
};

/// Dynamic time warping with Euclidean local cost, O(NM) time and memory.
/// Traceback prefers the diagonal, then the step that advances x, then y.
DtwResult dtw(std::span<const Point> x, std::span<const Point> y, const DtwOptions& opts = {});

/// Cost only, O(min(N, M)) memory.
double dtw_cost(std::span<const Point> x, std::span<const Point> y, const DtwOptions& opts = {});

struct ProcrustesResult {
  double d = 0.0;           // residual; divided by the centred norm of the first curve when standardized
  double gamma_star = 1.0;  // optimal scale applied to the second curve
  double theta_star = 0.0;  // optimal rotation, radians in (-pi, pi]
  Point t_star;             // optimal translation
  std::vector<Point> z;     // gamma_star * R(theta_star) * second + t_star
};

/// Least-squares fit of the second curve onto the first over scale, proper
/// rotation and translation. Both curves must have the same point count.
ProcrustesResult procrustes(std::span<const Point> first, std::span<const Point> second,
                            bool standardized = true);

/// DTW between the first curve and the Procrustes-aligned second curve.
double direct_composition(std::span<const Point> first, std::span<const Point> second,
                          const DtwOptions& opts = {});

/// Same, reusing an alignment already computed for (first, second).
double direct_composition(std::span<const Point> first, const ProcrustesResult& aligned,
                          const DtwOptions& opts = {});

/// Number of dtw/procrustes evaluations since process start (all threads).
std::uint64_t kernel_call_count();

}  // namespace contyp::metrics
