#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "argus/error.hpp"

namespace argus {

// Row-major H x W planes: rows index y, columns index x.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using SoftMask = Plane<double>;
using BinMask = Plane<bool>;
using DepthMap = Plane<double>;  // 1 = nearest

struct ImageRgb {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  ImageRgb() = default;

  ImageRgb(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw DegenerateInput("image dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(3) * w * h, 0);
  }

  ImageRgb(int w, int h, std::vector<std::uint8_t> data)
      : width(w), height(h), pixels(std::move(data)) {
    if (w < 1 || h < 1) throw DegenerateInput("image dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(3) * w * h)
      throw DimensionMismatch("pixel buffer length must be 3*width*height");
  }

  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool operator==(const ImageRgb&) const = default;
};

template <typename A, typename B>
bool same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename A, typename B>
void require_same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b, const char* what) {
  if (!same_shape(a, b)) throw DimensionMismatch(std::string(what) + ": dimension mismatch");
}

template <typename A>
void require_image_shape(const Eigen::ArrayBase<A>& plane, const ImageRgb& img, const char* what) {
  if (plane.rows() != img.height || plane.cols() != img.width)
    throw DimensionMismatch(std::string(what) + ": plane does not match image dimensions");
}

}  // namespace argus
