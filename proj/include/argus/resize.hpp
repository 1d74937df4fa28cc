#pragma once

#include <algorithm>
#include <cmath>

#include "argus/image.hpp"

namespace argus {

namespace detail {

struct Tap {
  int lo;
  int hi;
  double frac;
};

// Half-pixel-centre sampling position for destination index i.
inline Tap bilinear_tap(int i, int src_n, int dst_n) {
  double pos = (i + 0.5) * static_cast<double>(src_n) / dst_n - 0.5;
  pos = std::clamp(pos, 0.0, static_cast<double>(src_n - 1));
  const int lo = static_cast<int>(std::floor(pos));
  const int hi = std::min(lo + 1, src_n - 1);
  return {lo, hi, pos - lo};
}

}  // namespace detail

template <typename Scalar>
Plane<Scalar> resize_bilinear(const Plane<Scalar>& src, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw DegenerateInput("resize target must be non-empty");
  if (rows == src.rows() && cols == src.cols()) return src;
  Plane<Scalar> out(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y) {
    const auto ty = detail::bilinear_tap(static_cast<int>(y), static_cast<int>(src.rows()), static_cast<int>(rows));
    for (Eigen::Index x = 0; x < cols; ++x) {
      const auto tx = detail::bilinear_tap(static_cast<int>(x), static_cast<int>(src.cols()), static_cast<int>(cols));
      const Scalar top = src(ty.lo, tx.lo) * (1 - tx.frac) + src(ty.lo, tx.hi) * tx.frac;
      const Scalar bottom = src(ty.hi, tx.lo) * (1 - tx.frac) + src(ty.hi, tx.hi) * tx.frac;
      out(y, x) = top * (1 - ty.frac) + bottom * ty.frac;
    }
  }
  return out;
}

ImageRgb resize_bilinear(const ImageRgb& src, int width, int height);

// Bilinear resize followed by clamping to [0, 1].
inline SoftMask resize_mask(const SoftMask& m, Eigen::Index rows, Eigen::Index cols) {
  return resize_bilinear(m, rows, cols).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace argus
