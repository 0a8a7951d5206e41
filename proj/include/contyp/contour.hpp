#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace contyp {

/// Raised for any contract violation or I/O failure inside the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Where a contour came from: an ingested drawing or a warp of another contour.
struct Provenance {
  std::string transform_id;  // empty for originals
  std::string parent_id;     // empty for originals

  bool is_original() const { return transform_id.empty(); }
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Ordered boundary of a cross-section, revolution axis OY, lowermost point on OX.
struct Contour {
  std::string id;
  std::vector<Point> points;
  std::optional<double> radius;
  Provenance source;

  std::size_t size() const { return points.size(); }
};

struct ContourSet {
  std::string dataset_id;
  std::vector<Contour> contours;

  std::size_t size() const { return contours.size(); }
};

enum class Assumption { A, B, C, Degenerate };

const char* to_string(Assumption a);

struct Violation {
  Assumption assumption;
  double measured;
  double tolerance;
};

struct ValidationReport {
  std::string contour_id;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

double arc_length(std::span<const Point> pts);

/// 1e-6 of the bounding-box diagonal.
double default_position_tolerance(std::span<const Point> pts);

/// Savitzky-Golay smoothing of x and y independently. The ends are padded by
/// point reflection (2*p[0] - p[i]) so polynomials up to degree `order` pass
/// through unchanged away from the ends and straight lines pass through everywhere.
Contour smooth(const Contour& contour, int window, int order);

/// Convolution weights of the centred Savitzky-Golay smoother, length `window`.
std::vector<double> savgol_coefficients(int window, int order);

/// Translate so the lowest point lies on OX and the first uppermost point on OY,
/// then recompute the radius. Residual violations are reported, not thrown.
std::pair<Contour, ValidationReport> normalize_position(const Contour& contour, double eps_pos);

/// m points at equal arc-length spacing; endpoints copied exactly.
Contour resample_arclength(const Contour& contour, int m);

ValidationReport validate(const Contour& contour, double eps_pos);

/// Smallest x among points with y <= eps_pos, if any.
std::optional<double> compute_radius(std::span<const Point> pts, double eps_pos);

Contour flip_y(const Contour& contour);

struct PreprocessParams {
  int window = 11;
  int order = 3;
  int resample_m = 200;
  std::optional<double> eps_pos;  // per-contour default when absent
  bool flip_y = false;
};

/// flip (optional) -> smooth -> normalize. Smoothing window is clipped to the
/// contour length for short contours; contours with fewer than 3 points are not smoothed.
std::pair<Contour, ValidationReport> preprocess(const Contour& contour, const PreprocessParams& params);

}  // namespace contyp
