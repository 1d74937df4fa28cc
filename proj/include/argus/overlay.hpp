#pragma once

#include <array>
#include <cstdint>

#include "argus/image.hpp"

namespace argus {

struct OverlayStyle {
  std::array<std::uint8_t, 3> fill{255, 0, 0};
  double fill_alpha = 0.4;
  std::array<std::uint8_t, 3> contour{255, 255, 0};
  int contour_width = 2;  // 0 disables the contour
};

// Foreground pixels within city-block distance `width` of a background pixel.
// The image border does not count as background.
BinMask mask_contour(const BinMask& mask, int width);

// Tints the mask at fill_alpha and paints its contour opaque.
ImageRgb render_overlay(const ImageRgb& img, const BinMask& mask, const OverlayStyle& style = {});

}  // namespace argus
