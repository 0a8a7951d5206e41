#include "contyp/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace contyp::augmentation {

const char* to_string(Region r) {
  switch (r) {
    case Region::Top: return "top";
    case Region::Middle: return "middle";
    case Region::Bottom: return "bottom";
  }
  return "?";
}

const char* to_string(Direction d) { return d == Direction::Left ? "left" : "right"; }

std::string transform_id(const WarpSpec& spec) {
  return std::string(to_string(spec.region)) + "-" + to_string(spec.direction);
}

std::array<WarpSpec, 6> all_warps(double magnitude) {
  std::array<WarpSpec, 6> out;
  std::size_t k = 0;
  for (Region r : {Region::Top, Region::Middle, Region::Bottom})
    for (Direction d : {Direction::Left, Direction::Right}) out[k++] = {r, d, magnitude};
  return out;
}

namespace {

using Net = std::array<std::array<double, 4>, 4>;  // [column along x][row along y]

std::array<double, 4> bernstein3(double t) {
  const double s = 1.0 - t;
  return {s * s * s, 3.0 * t * s * s, 3.0 * t * t * s, t * t * t};
}

double evaluate_patch(const Net& net, double u, double v) {
  const auto bu = bernstein3(u), bv = bernstein3(v);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) acc += bu[i] * bv[j] * net[i][j];
  return acc;
}

Net control_net(double peak, const std::array<double, 4>& rows) {
  constexpr std::array<double, 4> columns{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  Net net{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) net[i][j] = peak * columns[i] * rows[j];
  return net;
}

}  // namespace

Contour warp(const Contour& contour, const WarpSpec& spec, double max_magnitude) {
  if (!(spec.magnitude >= 0.0)) throw Error("warp magnitude must be >= 0");
  if (spec.magnitude > max_magnitude) {
    throw Error("warp magnitude " + std::to_string(spec.magnitude) + " exceeds maximum " +
                std::to_string(max_magnitude));
  }
  const auto& pts = contour.points;
  if (pts.size() < 2) throw Error("warp: degenerate contour '" + contour.id + "'");

  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo, x_hi = -y_lo;
  for (const auto& p : pts) {
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
    x_hi = std::max(x_hi, p.x);
  }
  if (!(y_hi > y_lo)) throw Error("warp: degenerate bounding box for '" + contour.id + "' (zero height)");
  if (spec.magnitude == 0.0) return contour;

  const double width = std::max(x_hi, 0.0);
  const double third = (y_hi - y_lo) / 3.0;
  double band_lo = y_lo, band_hi = y_lo + third;
  if (spec.region == Region::Middle) {
    band_lo = y_lo + third;
    band_hi = y_lo + 2.0 * third;
  } else if (spec.region == Region::Top) {
    band_lo = y_lo + 2.0 * third;
    band_hi = y_hi;
  }

  const double peak = (spec.direction == Direction::Right ? 1.0 : -1.0) * spec.magnitude * width;
  const Net lower = control_net(peak, {0.0, 0.0, 1.0, 1.0});
  const Net upper = control_net(peak, {1.0, 1.0, 0.0, 0.0});

  Contour out = contour;
  if (width > 0.0) {
    for (auto& p : out.points) {
      if (p.y <= band_lo || p.y >= band_hi) continue;
      const double v = (p.y - band_lo) / (band_hi - band_lo);
      const double u = p.x / width;
      p.x += v < 0.5 ? evaluate_patch(lower, u, 2.0 * v) : evaluate_patch(upper, u, 2.0 * v - 1.0);
    }
  }
  return normalize_position(out, default_position_tolerance(out.points)).first;
}

namespace {

void expand_one(const Contour& original, double magnitude, double max_magnitude, Contour* slots) {
  slots[0] = original;
  const auto warps = all_warps(magnitude);
  for (std::size_t w = 0; w < warps.size(); ++w) {
    Contour c = warp(original, warps[w], max_magnitude);
    c.source = {transform_id(warps[w]), original.id};
    c.id = original.id + "~" + c.source.transform_id;
    slots[w + 1] = std::move(c);
  }
}

constexpr std::size_t kCopies = 7;

}  // namespace

ContourSet augment_set_serial(const ContourSet& set, double magnitude, double max_magnitude) {
  ContourSet out{set.dataset_id + "-augmented", std::vector<Contour>(set.size() * kCopies)};
  for (std::size_t i = 0; i < set.size(); ++i) {
    expand_one(set.contours[i], magnitude, max_magnitude, &out.contours[i * kCopies]);
  }
  return out;
}

ContourSet augment_set(const ContourSet& set, double magnitude, double max_magnitude) {
  if (magnitude > max_magnitude) {
    throw Error("warp magnitude " + std::to_string(magnitude) + " exceeds maximum " + std::to_string(max_magnitude));
  }
  ContourSet out{set.dataset_id + "-augmented", std::vector<Contour>(set.size() * kCopies)};
  const auto n = static_cast<std::ptrdiff_t>(set.size());
  std::mutex err_mutex;
  std::ptrdiff_t first_failure = n;
  std::string failure;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      expand_one(set.contours[i], magnitude, max_magnitude, &out.contours[i * kCopies]);
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      if (i < first_failure) {
        first_failure = i;
        failure = e.what();
      }
    }
  }
  if (!failure.empty()) throw Error(failure);
  return out;
}

}  // namespace contyp::augmentation
