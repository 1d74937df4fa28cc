#pragma once

#include <optional>
#include <span>

#include "argus/geometry.hpp"
#include "argus/image.hpp"

namespace argus {

inline constexpr double kDefaultThreshold = 0.5;

// bit = value >= threshold
BinMask binarize(const SoftMask& m, double threshold = kDefaultThreshold);

inline SoftMask to_soft(const BinMask& m) { return m.cast<double>(); }

// Pixel-wise maximum over a non-empty list of equally sized masks.
SoftMask merge_masks(std::span<const SoftMask> masks);

// |a & b| / |a | b|, 1 when both are empty.
double iou(const BinMask& a, const BinMask& b);

std::optional<BBox> tight_box(const BinMask& m);

BinMask box_mask(int w, int h, const BBox& box);

struct Components {
  Plane<int> labels;  // 0 = background, 1..count
  int count = 0;
  std::vector<BBox> boxes;  // boxes[i] bounds label i + 1
};

// Nearest-neighbour resampling of a bit plane (pixel centres map to pixel centres).
BinMask resample_nearest(const BinMask& m, Eigen::Index rows, Eigen::Index cols);

// 8-connected labelling in row-major discovery order.
Components label_components(const BinMask& m);

}  // namespace argus
