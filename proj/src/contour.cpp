#include "contyp/contour.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace contyp {

const char* to_string(Assumption a) {
  switch (a) {
    case Assumption::A: return "A";
    case Assumption::B: return "B";
    case Assumption::C: return "C";
    case Assumption::Degenerate: return "degenerate";
  }
  return "?";
}

double arc_length(std::span<const Point> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    total += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  return total;
}

double default_position_tolerance(std::span<const Point> pts) {
  if (pts.empty()) return 1e-6;
  auto [xlo, xhi] = std::minmax_element(pts.begin(), pts.end(),
                                        [](const Point& a, const Point& b) { return a.x < b.x; });
  auto [ylo, yhi] = std::minmax_element(pts.begin(), pts.end(),
                                        [](const Point& a, const Point& b) { return a.y < b.y; });
  const double diag = std::hypot(xhi->x - xlo->x, yhi->y - ylo->y);
  return diag > 0.0 ? 1e-6 * diag : 1e-6;
}

std::vector<double> savgol_coefficients(int window, int order) {
  if (window < 3 || window % 2 == 0) throw Error("savgol: window must be odd and >= 3");
  if (order < 0 || order >= window) throw Error("savgol: order must satisfy 0 <= order < window");
  const int half = window / 2;
  // Abscissa scaled to [-1, 1]; the constant-term row of the pseudo-inverse is
  // unaffected by the scaling and the Vandermonde matrix stays well conditioned.
  Eigen::MatrixXd vander(window, order + 1);
  for (int i = 0; i < window; ++i) {
    const double t = static_cast<double>(i - half) / half;
    double p = 1.0;
    for (int j = 0; j <= order; ++j) {
      vander(i, j) = p;
      p *= t;
    }
  }
  const Eigen::MatrixXd pinv =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  std::vector<double> coeffs(window);
  for (int i = 0; i < window; ++i) coeffs[i] = pinv(0, i);
  return coeffs;
}

namespace {

std::vector<double> filter_channel(const std::vector<double>& v, const std::vector<double>& coeffs) {
  const int k = static_cast<int>(v.size());
  const int half = static_cast<int>(coeffs.size()) / 2;
  auto sample = [&](int i) {
    if (i < 0) return 2.0 * v[0] - v[-i];
    if (i >= k) return 2.0 * v[k - 1] - v[2 * (k - 1) - i];
    return v[i];
  };
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) {
    double acc = 0.0;
    for (int j = -half; j <= half; ++j) acc += coeffs[j + half] * sample(i + j);
    out[i] = acc;
  }
  return out;
}

}  // namespace

Contour smooth(const Contour& contour, int window, int order) {
  const int k = static_cast<int>(contour.size());
  if (window % 2 == 0) throw Error("smooth: window must be odd");
  if (window < 3) throw Error("smooth: window must be >= 3");
  if (window > k) throw Error("smooth: window exceeds contour length");
  if (order < 0 || order >= window) throw Error("smooth: order must satisfy 0 <= order < window");

  const auto coeffs = savgol_coefficients(window, order);
  std::vector<double> xs(k), ys(k);
  for (int i = 0; i < k; ++i) {
    xs[i] = contour.points[i].x;
    ys[i] = contour.points[i].y;
  }
  xs = filter_channel(xs, coeffs);
  ys = filter_channel(ys, coeffs);

  Contour out = contour;
  for (int i = 0; i < k; ++i) out.points[i] = {xs[i], ys[i]};
  return out;
}

std::optional<double> compute_radius(std::span<const Point> pts, double eps_pos) {
  std::optional<double> r;
  for (const auto& p : pts) {
    if (p.y <= eps_pos && (!r || p.x < *r)) r = p.x;
  }
  return r;
}

ValidationReport validate(const Contour& contour, double eps_pos) {
  ValidationReport report{contour.id, {}};
  const auto& pts = contour.points;
  if (pts.size() < 2 || arc_length(pts) <= 0.0) {
    report.violations.push_back({Assumption::Degenerate, static_cast<double>(pts.size()), 0.0});
    if (pts.empty()) return report;
  }

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  std::size_t top = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    min_x = std::min(min_x, pts[i].x);
    min_y = std::min(min_y, pts[i].y);
    if (pts[i].y > pts[top].y) top = i;
  }
  const double quadrant = std::min(min_x, min_y);
  if (quadrant < -eps_pos) report.violations.push_back({Assumption::A, quadrant, eps_pos});
  if (std::abs(min_y) > eps_pos) report.violations.push_back({Assumption::B, min_y, eps_pos});
  if (std::abs(pts[top].x) > eps_pos) report.violations.push_back({Assumption::C, pts[top].x, eps_pos});
  return report;
}

std::pair<Contour, ValidationReport> normalize_position(const Contour& contour, double eps_pos) {
  const auto& pts = contour.points;
  if (pts.size() < 2) throw Error("degenerate contour '" + contour.id + "': fewer than 2 points");
  if (std::all_of(pts.begin(), pts.end(), [&](const Point& p) { return p == pts.front(); })) {
    throw Error("degenerate contour '" + contour.id + "': all points identical");
  }

  double y_min = pts.front().y;
  std::size_t top = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    y_min = std::min(y_min, pts[i].y);
    if (pts[i].y > pts[top].y) top = i;  // strict: first in order wins ties
  }
  const double x_top = pts[top].x;

  Contour out = contour;
  for (auto& p : out.points) {
    p.x -= x_top;
    p.y -= y_min;
  }
  out.radius = compute_radius(out.points, eps_pos);
  auto report = validate(out, eps_pos);
  return {std::move(out), std::move(report)};
}

Contour resample_arclength(const Contour& contour, int m) {
  if (m < 2) throw Error("resample: m must be >= 2");
  const auto& pts = contour.points;
  if (pts.size() < 2) throw Error("resample: contour '" + contour.id + "' has fewer than 2 points");

  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  const double total = cum.back();
  if (!(total > 0.0)) throw Error("resample: contour '" + contour.id + "' has zero arc length");

  Contour out = contour;
  out.points.assign(m, Point{});
  out.points.front() = pts.front();
  out.points.back() = pts.back();

  std::size_t seg = 1;
  for (int i = 1; i < m - 1; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(m - 1);
    while (seg < pts.size() - 1 && cum[seg] < target) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? (target - cum[seg - 1]) / len : 0.0;
    out.points[i] = {pts[seg - 1].x + t * (pts[seg].x - pts[seg - 1].x),
                     pts[seg - 1].y + t * (pts[seg].y - pts[seg - 1].y)};
  }
  return out;
}

Contour flip_y(const Contour& contour) {
  Contour out = contour;
  for (auto& p : out.points) p.y = -p.y;
  return out;
}

std::pair<Contour, ValidationReport> preprocess(const Contour& contour, const PreprocessParams& params) {
  Contour work = params.flip_y ? flip_y(contour) : contour;
  const int k = static_cast<int>(work.size());
  if (k >= 3) {
    int window = std::min(params.window, k % 2 == 1 ? k : k - 1);
    if (window >= 3) {
      const int order = std::min(params.order, window - 1);
      work = smooth(work, window, order);
    }
  }
  const double eps = params.eps_pos.value_or(default_position_tolerance(work.points));
  return normalize_position(work, eps);
}

}  // namespace contyp
