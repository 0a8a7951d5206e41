#pragma once

#include "contyp/contour.hpp"

#include <array>
#include <string>

namespace contyp::augmentation {

enum class Region { Top, Middle, Bottom };
enum class Direction { Left, Right };

struct WarpSpec {
  Region region = Region::Top;
  Direction direction = Direction::Right;
  double magnitude = 0.1;  // fraction of the grid width
};

inline constexpr double kDefaultMaxMagnitude = 0.15;
inline constexpr double kDefaultMagnitude = 0.1;

const char* to_string(Region r);
const char* to_string(Direction d);

/// "top-right", "middle-left", ...
std::string transform_id(const WarpSpec& spec);

/// All six region x direction combinations, in a fixed order.
std::array<WarpSpec, 6> all_warps(double magnitude);

/// Horizontal bevel of one vertical third of a normalized contour.
///
/// The control grid spans x in [0, max x] (from the revolution axis outward)
/// and the y-extent of the target third. Each half of the third is a bicubic
/// Bezier patch on a 4x4 control net: columns carry the linear ramp 0, 1/3,
/// 2/3, 1 so displacement grows with distance from the axis; rows carry
/// (0, 0, 1, 1) on the lower half and (1, 1, 0, 0) on the upper half, giving a
/// bump with zero value and zero slope at the region boundaries. Points on the
/// axis and outside the third do not move; the largest displacement is
/// magnitude * grid width. The result is re-normalized.
Contour warp(const Contour& contour, const WarpSpec& spec, double max_magnitude = kDefaultMaxMagnitude);

/// Each original followed by its six warps; |output| = 7 n.
ContourSet augment_set(const ContourSet& set, double magnitude = kDefaultMagnitude,
                       double max_magnitude = kDefaultMaxMagnitude);

/// Same result without threading.
ContourSet augment_set_serial(const ContourSet& set, double magnitude = kDefaultMagnitude,
                              double max_magnitude = kDefaultMaxMagnitude);

}  // namespace contyp::augmentation
