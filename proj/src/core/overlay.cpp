#include "argus/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace argus {

BinMask mask_contour(const BinMask& mask, int width) {
  BinMask near_bg = !mask;
  // grow the background by one 4-neighbour step per iteration
  for (int i = 0; i < width; ++i) {
    BinMask grown = near_bg;
    const Eigen::Index h = mask.rows(), w = mask.cols();
    if (h > 1) {
      grown.topRows(h - 1) = grown.topRows(h - 1) || near_bg.bottomRows(h - 1);
      grown.bottomRows(h - 1) = grown.bottomRows(h - 1) || near_bg.topRows(h - 1);
    }
    if (w > 1) {
      grown.leftCols(w - 1) = grown.leftCols(w - 1) || near_bg.rightCols(w - 1);
      grown.rightCols(w - 1) = grown.rightCols(w - 1) || near_bg.leftCols(w - 1);
    }
    near_bg = grown;
  }
  return mask && near_bg;
}

ImageRgb render_overlay(const ImageRgb& img, const BinMask& mask, const OverlayStyle& style) {
  require_image_shape(mask, img, "overlay mask");
  ImageRgb out = img;
  const BinMask edge = mask_contour(mask, style.contour_width);
  const double a = style.fill_alpha;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask(y, x)) continue;
      auto* p = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        if (edge(y, x))
          p[c] = style.contour[c];
        else
          p[c] = static_cast<std::uint8_t>(std::lround((1.0 - a) * p[c] + a * style.fill[c]));
      }
    }
  }
  return out;
}

}  // namespace argus
