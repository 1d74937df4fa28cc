#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "argus/image.hpp"

namespace argus {

// Half-open integer box [x0, x1) x [y0, y1).
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long area() const { return width() > 0 && height() > 0 ? static_cast<long>(width()) * height() : 0; }
  bool empty() const { return area() == 0; }

  bool within(int w, int h) const { return 0 <= x0 && x0 < x1 && x1 <= w && 0 <= y0 && y0 < y1 && y1 <= h; }
  bool contains_pixel(int x, int y) const { return x0 <= x && x < x1 && y0 <= y && y < y1; }
  bool strictly_contains(double x, double y) const { return x0 < x && x < x1 && y0 < y && y < y1; }

  BBox translated(int dx, int dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

  bool operator==(const BBox&) const = default;
};

BBox full_box(int w, int h);
BBox box_union(const BBox& a, const BBox& b);
BBox box_intersection(const BBox& a, const BBox& b);
double box_iou(const BBox& a, const BBox& b);
BBox clamp_box(const BBox& b, int w, int h);

enum class Polarity { positive, negative };

struct PromptPoint {
  double x = 0;
  double y = 0;
  Polarity polarity = Polarity::positive;
};

enum class RegionLabel { left, center_v, right, top, center_h, bottom, center, full };

struct Region {
  RegionLabel label;
  BBox box;
  bool operator==(const Region&) const = default;
};

enum class FocusStrategy { single_left, single_up, double_split, five, automatic };
enum class Orientation { vertical, horizontal };

std::string_view to_string(RegionLabel label);
std::string_view to_string(FocusStrategy strategy);
std::string_view to_string(Orientation orientation);
std::optional<FocusStrategy> parse_focus_strategy(std::string_view text);
std::optional<Orientation> parse_orientation(std::string_view text);

// Orientation used when the model gives none.
Orientation fallback_orientation(int w, int h);

struct ResizedImage {
  ImageRgb image;
  double scale = 1.0;  // new / original; original coordinate = new / scale
};

ResizedImage resize_longest_side(const ImageRgb& img, int limit);

// Copy of the pixels inside box (clamped to the image); box must overlap the image.
ImageRgb crop(const ImageRgb& img, const BBox& box);

// Vertical orientation slices the frame into left/center/right columns,
// horizontal into top/center/bottom rows. Orientation only matters for
// FocusStrategy::automatic.
std::vector<Region> decompose_regions(int w, int h, FocusStrategy strategy,
                                      Orientation orientation = Orientation::vertical);

// 2 x 5 lattice at heights {1/3, 2/3} and widths {1/10, ..., 9/10}, row-major.
std::vector<Eigen::Vector2d> point_grid(const BBox& box, int n = 10);

}  // namespace argus
