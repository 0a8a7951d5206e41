#pragma once

// Independent reference computations used only by the tests.

#include "contyp/clustering.hpp"
#include "contyp/metrics.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace contyp::oracle {

struct BruteForceDtw {
  metrics::DtwResult best;
  std::size_t paths = 0;
};

/// Enumerates every admissible warping path; each path's cost is summed from
/// the first step onward.
inline BruteForceDtw brute_force_dtw(std::span<const Point> x, std::span<const Point> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("empty sequence");
  if (x.size() > 8 || y.size() > 8) throw std::invalid_argument("brute force bound is 8x8");
  BruteForceDtw out;
  out.best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> path{{0, 0}};

  std::function<void()> extend = [&] {
    const auto [i, j] = path.back();
    if (i == x.size() - 1 && j == y.size() - 1) {
      ++out.paths;
      double cost = 0.0;
      for (const auto& [a, b] : path) cost += std::hypot(x[a].x - y[b].x, x[a].y - y[b].y);
      if (cost < out.best.cost) {
        out.best.cost = cost;
        out.best.path.steps = path;
      }
      return;
    }
    const std::pair<std::size_t, std::size_t> steps[] = {{1, 0}, {0, 1}, {1, 1}};
    for (const auto& [di, dj] : steps) {
      if (i + di < x.size() && j + dj < y.size()) {
        path.push_back({i + di, j + dj});
        extend();
        path.pop_back();
      }
    }
  };
  extend();
  return out;
}

struct ClosedFormProcrustes {
  double d;
  double gamma;
  double theta;
};

/// 2D Procrustes without any matrix decomposition: the optimal proper rotation
/// angle is atan2 of the summed cross and dot products of the centred points.
inline ClosedFormProcrustes closed_form_procrustes(std::span<const Point> a, std::span<const Point> b) {
  const double k = static_cast<double>(a.size());
  double ax = 0, ay = 0, bx = 0, by = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ax += a[j].x;
    ay += a[j].y;
    bx += b[j].x;
    by += b[j].y;
  }
  ax /= k;
  ay /= k;
  bx /= k;
  by /= k;
  double dot = 0, cross = 0, na = 0, nb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double px = a[j].x - ax, py = a[j].y - ay, qx = b[j].x - bx, qy = b[j].y - by;
    dot += qx * px + qy * py;
    cross += qx * py - qy * px;
    na += px * px + py * py;
    nb += qx * qx + qy * qy;
  }
  const double s = std::hypot(dot, cross);
  return {1.0 - s * s / (na * nb), s / nb, std::atan2(cross, dot)};
}

/// Textbook agglomerative clustering: every step recomputes all inter-cluster
/// distances from the leaf-level matrix.
inline clustering::Dendrogram naive_linkage_oracle(const similarity::Matrix& d, std::vector<std::string> ids,
                                                   clustering::Linkage method) {
  const std::size_t n = ids.size();
  if (n > 12) throw std::invalid_argument("oracle bound is n <= 12");
  std::vector<std::vector<std::size_t>> members(2 * n - 1);
  std::vector<std::pair<std::size_t, std::size_t>> children(2 * n - 1, {0, 0});
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), std::size_t{0});

  auto leaf = [&](std::size_t i, std::size_t j) { return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

  // WPGMA has no closed form over leaves: expand the younger cluster into its
  // two children and average, recursively.
  std::function<double(std::size_t, std::size_t)> wpgma = [&](std::size_t p, std::size_t q) -> double {
    if (p < n && q < n) return leaf(p, q);
    const std::size_t younger = std::max(p, q), other = std::min(p, q);
    const auto [c1, c2] = children[younger];
    return (wpgma(c1, other) + wpgma(c2, other)) / 2.0;
  };

  auto distance = [&](std::size_t p, std::size_t q) {
    switch (method) {
      case clustering::Linkage::Single: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : members[p])
          for (std::size_t j : members[q]) best = std::min(best, leaf(i, j));
        return best;
      }
      case clustering::Linkage::Average: {
        double sum = 0.0;
        for (std::size_t i : members[p])
          for (std::size_t j : members[q]) sum += leaf(i, j);
        return sum / static_cast<double>(members[p].size() * members[q].size());
      }
      case clustering::Linkage::Weighted: return wpgma(p, q);
    }
    return 0.0;
  };

  clustering::Dendrogram out{std::move(ids), {}};
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> key{0, 0};
    bool found = false;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t p = std::min(active[x], active[y]), q = std::max(active[x], active[y]);
        const double dist = distance(p, q);
        if (!found || dist < best || (dist == best && std::pair{p, q} < key)) {
          found = true;
          best = dist;
          key = {p, q};
        }
      }
    }
    const std::size_t created = n + step;
    children[created] = key;
    members[created] = members[key.first];
    members[created].insert(members[created].end(), members[key.second].begin(), members[key.second].end());
    std::sort(members[created].begin(), members[created].end());
    out.merges.push_back({key.first, key.second, best, members[created].size()});
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](std::size_t v) { return v == key.first || v == key.second; }),
                 active.end());
    active.push_back(created);
  }
  return out;
}

/// Pearson correlation via the raw-moment formula (no centring pass).
inline double raw_moment_correlation(const std::vector<double>& y, const std::vector<double>& z) {
  const double n = static_cast<double>(y.size());
  long double sy = 0, sz = 0, syy = 0, szz = 0, syz = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sy += y[i];
    sz += z[i];
    syy += static_cast<long double>(y[i]) * y[i];
    szz += static_cast<long double>(z[i]) * z[i];
    syz += static_cast<long double>(y[i]) * z[i];
  }
  const long double num = n * syz - sy * sz;
  const long double den = std::sqrt((n * syy - sy * sy) * (n * szz - sz * sz));
  return static_cast<double>(num / den);
}

inline std::vector<double> upper_triangle(const similarity::Matrix& m) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

}  // namespace contyp::oracle
