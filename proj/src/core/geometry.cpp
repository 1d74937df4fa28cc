#include "argus/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "argus/resize.hpp"

namespace argus {

BBox full_box(int w, int h) { return {0, 0, w, h}; }

BBox box_union(const BBox& a, const BBox& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

BBox box_intersection(const BBox& a, const BBox& b) {
  BBox r{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
  if (r.x1 <= r.x0 || r.y1 <= r.y0) return {};
  return r;
}

double box_iou(const BBox& a, const BBox& b) {
  const long inter = box_intersection(a, b).area();
  const long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

BBox clamp_box(const BBox& b, int w, int h) {
  return {std::clamp(b.x0, 0, w), std::clamp(b.y0, 0, h), std::clamp(b.x1, 0, w), std::clamp(b.y1, 0, h)};
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::left: return "left";
    case RegionLabel::center_v: return "center_v";
    case RegionLabel::right: return "right";
    case RegionLabel::top: return "top";
    case RegionLabel::center_h: return "center_h";
    case RegionLabel::bottom: return "bottom";
    case RegionLabel::center: return "center";
    case RegionLabel::full: return "full";
  }
  return "unknown";
}

std::string_view to_string(FocusStrategy strategy) {
  switch (strategy) {
    case FocusStrategy::single_left: return "single_left";
    case FocusStrategy::single_up: return "single_up";
    case FocusStrategy::double_split: return "double";
    case FocusStrategy::five: return "five";
    case FocusStrategy::automatic: return "auto";
  }
  return "unknown";
}

std::string_view to_string(Orientation orientation) {
  return orientation == Orientation::vertical ? "vertical" : "horizontal";
}

std::optional<FocusStrategy> parse_focus_strategy(std::string_view text) {
  for (auto s : {FocusStrategy::single_left, FocusStrategy::single_up, FocusStrategy::double_split,
                 FocusStrategy::five, FocusStrategy::automatic}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  if (text == "vertical") return Orientation::vertical;
  if (text == "horizontal") return Orientation::horizontal;
  return std::nullopt;
}

Orientation fallback_orientation(int w, int h) { return w >= h ? Orientation::vertical : Orientation::horizontal; }

ImageRgb crop(const ImageRgb& img, const BBox& box) {
  const BBox b = clamp_box(box, img.width, img.height);
  if (b.empty()) throw DegenerateInput("crop: box does not overlap the image");
  ImageRgb out(b.width(), b.height());
  for (int y = 0; y < b.height(); ++y)
    std::copy_n(img.at(b.x0, b.y0 + y), 3 * b.width(), out.at(0, y));
  return out;
}

ResizedImage resize_longest_side(const ImageRgb& img, int limit) {
  if (limit < 1) throw DegenerateInput("resize limit must be at least 1");
  const int longest = std::max(img.width, img.height);
  if (longest <= limit) return {img, 1.0};

  const double scale = static_cast<double>(limit) / longest;
  int w = limit;
  int h = limit;
  if (img.width >= img.height) {
    h = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.height) * limit / img.width)));
  } else {
    w = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.width) * limit / img.height)));
  }
  return {resize_bilinear(img, w, h), scale};
}

ImageRgb resize_bilinear(const ImageRgb& src, int width, int height) {
  if (width == src.width && height == src.height) return src;
  ImageRgb out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto ty = detail::bilinear_tap(y, src.height, height);
    for (int x = 0; x < width; ++x) {
      const auto tx = detail::bilinear_tap(x, src.width, width);
      const auto* a = src.at(tx.lo, ty.lo);
      const auto* b = src.at(tx.hi, ty.lo);
      const auto* c = src.at(tx.lo, ty.hi);
      const auto* d = src.at(tx.hi, ty.hi);
      auto* o = out.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const double top = a[ch] * (1 - tx.frac) + b[ch] * tx.frac;
        const double bottom = c[ch] * (1 - tx.frac) + d[ch] * tx.frac;
        o[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(top * (1 - ty.frac) + bottom * ty.frac), 0L, 255L));
      }
    }
  }
  return out;
}

namespace {

std::array<int, 2> thirds(int n) { return {n / 3, (2 * n) / 3}; }

void push_vertical_thirds(std::vector<Region>& out, int w, int h) {
  const auto [a, b] = thirds(w);
  out.push_back({RegionLabel::left, {0, 0, a, h}});
  out.push_back({RegionLabel::center_v, {a, 0, b, h}});
  out.push_back({RegionLabel::right, {b, 0, w, h}});
}

void push_horizontal_thirds(std::vector<Region>& out, int w, int h) {
  const auto [a, b] = thirds(h);
  out.push_back({RegionLabel::top, {0, 0, w, a}});
  out.push_back({RegionLabel::center_h, {0, a, w, b}});
  out.push_back({RegionLabel::bottom, {0, b, w, h}});
}

}  // namespace

std::vector<Region> decompose_regions(int w, int h, FocusStrategy strategy, Orientation orientation) {
  if (w < 3 || h < 3) throw DegenerateInput("region decomposition needs at least 3x3 pixels");
  std::vector<Region> out;
  switch (strategy) {
    case FocusStrategy::single_left:
      push_vertical_thirds(out, w, h);
      break;
    case FocusStrategy::single_up:
      push_horizontal_thirds(out, w, h);
      break;
    case FocusStrategy::double_split:
      push_vertical_thirds(out, w, h);
      push_horizontal_thirds(out, w, h);
      break;
    case FocusStrategy::five: {
      const int hw = w / 2;
      const int hh = h / 2;
      out.push_back({RegionLabel::left, {0, 0, hw, h}});
      out.push_back({RegionLabel::right, {hw, 0, w, h}});
      out.push_back({RegionLabel::top, {0, 0, w, hh}});
      out.push_back({RegionLabel::bottom, {0, hh, w, h}});
      const int cx0 = w / 4;
      const int cy0 = h / 4;
      out.push_back({RegionLabel::center, {cx0, cy0, cx0 + hw, cy0 + hh}});
      break;
    }
    case FocusStrategy::automatic:
      if (orientation == Orientation::vertical) {
        push_vertical_thirds(out, w, h);
      } else {
        push_horizontal_thirds(out, w, h);
      }
      break;
  }
  return out;
}

namespace {

// Lattice offsets are quantised to 1/1024 px so that integer translations
// of the box move every point exactly.
double lattice_offset(int numerator, int denominator, int extent) {
  constexpr double kQuantum = 1024.0;
  const double exact = static_cast<double>(numerator) * extent / denominator;
  return std::round(exact * kQuantum) / kQuantum;
}

}  // namespace

std::vector<Eigen::Vector2d> point_grid(const BBox& box, int n) {
  if (n != 10) throw UnsupportedGrid("only the 10-point grid is supported");
  if (box.empty()) throw DegenerateInput("point grid needs a non-empty box");
  std::vector<Eigen::Vector2d> points;
  points.reserve(10);
  for (int row = 0; row < 2; ++row) {
    const double y = box.y0 + lattice_offset(row + 1, 3, box.height());
    for (int col = 0; col < 5; ++col) {
      const double x = box.x0 + lattice_offset(2 * col + 1, 10, box.width());
      points.emplace_back(x, y);
    }
  }
  return points;
}

}  // namespace argus
