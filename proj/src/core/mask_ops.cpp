#include "argus/mask_ops.hpp"

#include <vector>

namespace argus {

BinMask binarize(const SoftMask& m, double threshold) { return m >= threshold; }

SoftMask merge_masks(std::span<const SoftMask> masks) {
  if (masks.empty()) throw DegenerateInput("merge_masks: empty mask list");
  SoftMask out = masks.front();
  for (const auto& m : masks.subspan(1)) {
    require_same_shape(out, m, "merge_masks");
    out = out.max(m);
  }
  return out;
}

double iou(const BinMask& a, const BinMask& b) {
  require_same_shape(a, b, "iou");
  const auto inter = (a && b).count();
  const auto uni = (a || b).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<BBox> tight_box(const BinMask& m) {
  int x0 = static_cast<int>(m.cols());
  int y0 = static_cast<int>(m.rows());
  int x1 = -1;
  int y1 = -1;
  for (Eigen::Index y = 0; y < m.rows(); ++y) {
    for (Eigen::Index x = 0; x < m.cols(); ++x) {
      if (!m(y, x)) continue;
      x0 = std::min(x0, static_cast<int>(x));
      y0 = std::min(y0, static_cast<int>(y));
      x1 = std::max(x1, static_cast<int>(x));
      y1 = std::max(y1, static_cast<int>(y));
    }
  }
  if (x1 < 0) return std::nullopt;
  return BBox{x0, y0, x1 + 1, y1 + 1};
}

BinMask box_mask(int w, int h, const BBox& box) {
  BinMask m = BinMask::Constant(h, w, false);
  const BBox b = clamp_box(box, w, h);
  if (!b.empty()) m.block(b.y0, b.x0, b.height(), b.width()).setConstant(true);
  return m;
}

BinMask resample_nearest(const BinMask& m, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw DegenerateInput("resample target must be non-empty");
  if (rows == m.rows() && cols == m.cols()) return m;
  BinMask out(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y) {
    const auto sy = std::min<Eigen::Index>(m.rows() - 1, static_cast<Eigen::Index>((y + 0.5) * m.rows() / rows));
    for (Eigen::Index x = 0; x < cols; ++x) {
      const auto sx = std::min<Eigen::Index>(m.cols() - 1, static_cast<Eigen::Index>((x + 0.5) * m.cols() / cols));
      out(y, x) = m(sy, sx);
    }
  }
  return out;
}

Components label_components(const BinMask& m) {
  Components c;
  c.labels = Plane<int>::Zero(m.rows(), m.cols());
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < m.rows(); ++y) {
    for (int x = 0; x < m.cols(); ++x) {
      if (!m(y, x) || c.labels(y, x) != 0) continue;
      const int label = ++c.count;
      BBox box{x, y, x + 1, y + 1};
      stack.push_back({x, y});
      c.labels(y, x) = label;
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        box = box_union(box, {px, py, px + 1, py + 1});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx;
            const int ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= m.cols() || ny >= m.rows()) continue;
            if (!m(ny, nx) || c.labels(ny, nx) != 0) continue;
            c.labels(ny, nx) = label;
            stack.push_back({nx, ny});
          }
        }
      }
      c.boxes.push_back(box);
    }
  }
  return c;
}

}  // namespace argus
