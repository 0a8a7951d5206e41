#include "contyp/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace contyp::metrics {

namespace {

std::atomic<std::uint64_t> g_kernel_calls{0};

inline double local_cost(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Band {
  std::size_t n, m;
  std::optional<std::size_t> width;

  // Column range [lo, hi] admissible in row i.
  std::pair<std::size_t, std::size_t> columns(std::size_t i) const {
    if (!width) return {0, m - 1};
    const double centre = n > 1 ? static_cast<double>(i) * static_cast<double>(m - 1) / static_cast<double>(n - 1) : 0.0;
    const double lo = std::max(0.0, std::floor(centre - static_cast<double>(*width)));
    const double hi = std::min(static_cast<double>(m - 1), std::ceil(centre + static_cast<double>(*width)));
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
};

void check_inputs(std::span<const Point> x, std::span<const Point> y) {
  if (x.empty() || y.empty()) throw Error("dtw: empty sequence");
}

}  // namespace

std::uint64_t kernel_call_count() { return g_kernel_calls.load(std::memory_order_relaxed); }

bool is_admissible(const WarpingPath& path, std::size_t n, std::size_t m) {
  const auto& s = path.steps;
  if (s.empty() || n == 0 || m == 0) return false;
  if (s.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (s.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t l = 1; l < s.size(); ++l) {
    if (s[l].first < s[l - 1].first || s[l].second < s[l - 1].second) return false;
    const std::size_t dn = s[l].first - s[l - 1].first;
    const std::size_t dm = s[l].second - s[l - 1].second;
    if (dn > 1 || dm > 1 || (dn == 0 && dm == 0)) return false;
  }
  return true;
}

double path_cost(std::span<const Point> x, std::span<const Point> y, const WarpingPath& path) {
  double total = 0.0;
  for (const auto& [i, j] : path.steps) total += local_cost(x[i], y[j]);
  return total;
}

DtwResult dtw(std::span<const Point> x, std::span<const Point> y, const DtwOptions& opts) {
  check_inputs(x, y);
  g_kernel_calls.fetch_add(1, std::memory_order_relaxed);
  const std::size_t n = x.size(), m = y.size();
  const Band band{n, m, opts.band};

  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };

  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = band.columns(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double c = local_cost(x[i], y[j]);
      if (i == 0 && j == 0) {
        at(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      at(i, j) = best + c;
    }
  }

  DtwResult result;
  result.cost = at(n - 1, m - 1);
  if (!std::isfinite(result.cost)) throw Error("dtw: band too narrow to connect the endpoints");

  std::size_t i = n - 1, j = m - 1;
  result.path.steps.push_back({i, j});
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.steps.push_back({i, j});
  }
  std::reverse(result.path.steps.begin(), result.path.steps.end());
  return result;
}

double dtw_cost(std::span<const Point> x, std::span<const Point> y, const DtwOptions& opts) {
  check_inputs(x, y);
  g_kernel_calls.fetch_add(1, std::memory_order_relaxed);
  const std::size_t n = x.size(), m = y.size();
  const Band band{n, m, opts.band};

  std::vector<double> prev(m, kInf), cur(m, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const auto [lo, hi] = band.columns(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double c = local_cost(x[i], y[j]);
      if (i == 0 && j == 0) {
        cur[j] = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      if (i > 0) best = std::min(best, prev[j]);
      if (j > 0) best = std::min(best, cur[j - 1]);
      cur[j] = best + c;
    }
    std::swap(prev, cur);
  }
  const double cost = prev[m - 1];
  if (!std::isfinite(cost)) throw Error("dtw: band too narrow to connect the endpoints");
  return cost;
}

ProcrustesResult procrustes(std::span<const Point> first, std::span<const Point> second, bool standardized) {
  if (first.size() != second.size()) {
    throw Error("procrustes: point counts differ (" + std::to_string(first.size()) + " vs " +
                std::to_string(second.size()) + ")");
  }
  if (first.size() < 2) throw Error("procrustes: need at least 2 points");
  g_kernel_calls.fetch_add(1, std::memory_order_relaxed);
  const std::size_t k = first.size();

  Point mean1, mean2;
  for (std::size_t j = 0; j < k; ++j) {
    mean1.x += first[j].x;
    mean1.y += first[j].y;
    mean2.x += second[j].x;
    mean2.y += second[j].y;
  }
  mean1 = {mean1.x / k, mean1.y / k};
  mean2 = {mean2.x / k, mean2.y / k};

  double norm1 = 0.0, norm2 = 0.0;
  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();  // sum of b a^T over centred points
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Vector2d a(first[j].x - mean1.x, first[j].y - mean1.y);
    const Eigen::Vector2d b(second[j].x - mean2.x, second[j].y - mean2.y);
    norm1 += a.squaredNorm();
    norm2 += b.squaredNorm();
    cross += b * a.transpose();
  }
  if (!(norm1 > 0.0)) throw Error("procrustes: first curve has zero centred norm");
  if (!(norm2 > 0.0)) throw Error("procrustes: second curve has zero centred norm");

  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2d& u = svd.matrixU();
  const Eigen::Matrix2d& v = svd.matrixV();
  const double sign = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix2d rot = v * Eigen::Vector2d(1.0, sign).asDiagonal() * u.transpose();
  const double trace = svd.singularValues()(0) + sign * svd.singularValues()(1);

  ProcrustesResult r;
  r.gamma_star = trace / norm2;
  r.theta_star = std::atan2(rot(1, 0), rot(0, 0));
  const Eigen::Vector2d t = Eigen::Vector2d(mean1.x, mean1.y) -
                            r.gamma_star * rot * Eigen::Vector2d(mean2.x, mean2.y);
  r.t_star = {t(0), t(1)};

  r.z.resize(k);
  double sse = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Vector2d b(second[j].x - mean2.x, second[j].y - mean2.y);
    const Eigen::Vector2d zj = Eigen::Vector2d(mean1.x, mean1.y) + r.gamma_star * rot * b;
    r.z[j] = {zj(0), zj(1)};
    const double dx = first[j].x - zj(0), dy = first[j].y - zj(1);
    sse += dx * dx + dy * dy;
  }
  r.d = standardized ? sse / norm1 : sse;
  return r;
}

double direct_composition(std::span<const Point> first, const ProcrustesResult& aligned, const DtwOptions& opts) {
  return dtw_cost(first, aligned.z, opts);
}

double direct_composition(std::span<const Point> first, std::span<const Point> second, const DtwOptions& opts) {
  return direct_composition(first, procrustes(first, second), opts);
}

}  // namespace contyp::metrics
