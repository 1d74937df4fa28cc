#pragma once

#include "argus/image.hpp"

namespace argus {

// Euclidean distance from every pixel to its nearest foreground pixel, with
// the nearest pixel's coordinates. Among equidistant foreground pixels the
// one with the smallest row-major index wins. Foreground pixels map to
// themselves at distance 0. An empty mask yields +inf distances and -1 indices.
struct NearestForeground {
  Plane<double> distance;
  Plane<int> row;
  Plane<int> col;
};

NearestForeground nearest_foreground(const BinMask& fg);

}  // namespace argus
