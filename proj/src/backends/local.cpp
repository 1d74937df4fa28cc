#include "argus/backends/local.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "argus/codec.hpp"
#include "argus/resize.hpp"

namespace argus {
namespace {

using json = nlohmann::ordered_json;

json normalized(const BBox& b, int w, int h) {
  return json::array({static_cast<double>(b.x0) / w, static_cast<double>(b.y0) / h, static_cast<double>(b.x1) / w,
                      static_cast<double>(b.y1) / h});
}

// Labels of components with at least one pixel inside region.
std::vector<int> components_touching(const Components& c, const BBox& region) {
  std::set<int> hit;
  const BBox r = clamp_box(region, static_cast<int>(c.labels.cols()), static_cast<int>(c.labels.rows()));
  if (r.empty()) return {};
  const auto block = c.labels.block(r.y0, r.x0, r.height(), r.width());
  for (Eigen::Index y = 0; y < block.rows(); ++y)
    for (Eigen::Index x = 0; x < block.cols(); ++x)
      if (block(y, x) > 0) hit.insert(block(y, x));
  return {hit.begin(), hit.end()};
}

bool pixel_set(const BinMask& m, double x, double y) {
  const auto px = static_cast<Eigen::Index>(std::floor(x));
  const auto py = static_cast<Eigen::Index>(std::floor(y));
  return px >= 0 && py >= 0 && px < m.cols() && py < m.rows() && m(py, px);
}

int label_at(const Components& c, double x, double y) {
  const auto px = static_cast<Eigen::Index>(std::floor(x));
  const auto py = static_cast<Eigen::Index>(std::floor(y));
  if (px < 0 || py < 0 || px >= c.labels.cols() || py >= c.labels.rows()) return 0;
  return c.labels(py, px);
}

}  // namespace

GroundTruth::GroundTruth(BinMask gt) : base_(std::move(gt)) {
  if (base_.size() == 0) throw DegenerateInput("ground truth mask is empty");
}

const GroundTruth::Level& GroundTruth::level(int width, int height) const {
  if (width < 1 || height < 1) throw ProtocolError("oracle query without image dimensions");
  std::lock_guard lock(mutex_);
  for (const auto& l : levels_)
    if (l->mask.cols() == width && l->mask.rows() == height) return *l;
  auto l = std::make_unique<Level>();
  l->mask = resample_nearest(base_, height, width);
  l->components = label_components(l->mask);
  levels_.push_back(std::move(l));
  return *levels_.back();
}

const BinMask& GroundTruth::at(int width, int height) const { return level(width, height).mask; }

const Components& GroundTruth::components_at(int width, int height) const {
  return level(width, height).components;
}

OracleVlm::OracleVlm(BinMask gt, std::string descriptor) : truth_(std::move(gt)), descriptor_(std::move(descriptor)) {}

std::string OracleVlm::query(const VlmRequest& req) {
  validate(req);
  const auto& ctx = req.context;
  const int w = ctx.image_width;
  const int h = ctx.image_height;
  const BinMask& gt = truth_.at(w, h);
  const Components& comps = truth_.components_at(w, h);
  json out;
  switch (req.kind) {
    case QueryKind::scene:
      out["scene"] = fmt::format("textured scene containing {} concealed target(s)", comps.count);
      break;
    case QueryKind::objects: {
      json regions = json::array();
      for (int label : components_touching(comps, ctx.region.value_or(full_box(w, h))))
        regions.push_back({{"description", fmt::format("target {}", label)},
                           {"box", normalized(comps.boxes[label - 1], w, h)}});
      out["regions"] = regions;
      out["structures"] = json::array({"compact rounded body"});
      break;
    }
    case QueryKind::inference:
      out["inference"] = "target texture and colour match the surrounding background";
      break;
    case QueryKind::orientation: {
      const auto box = tight_box(gt);
      const bool vertical = !box || box->height() >= box->width();
      out["orientation"] = vertical ? "vertical" : "horizontal";
      break;
    }
    case QueryKind::focus:
    case QueryKind::scan: {
      json boxes = json::array();
      for (int label : components_touching(comps, ctx.region.value_or(full_box(w, h))))
        boxes.push_back({{"box", normalized(comps.boxes[label - 1], w, h)},
                         {"rationale", fmt::format("target {}", label)}});
      out["boxes"] = boxes;
      break;
    }
    case QueryKind::hypotheses:
      out["hypotheses"] = json::array({"target hidden by background matching"});
      break;
    case QueryKind::verify: {
      if (!ctx.candidate) throw ProtocolError("oracle verify query without candidate box");
      double best = 0.0;
      for (const auto& b : comps.boxes) best = std::max(best, box_iou(*ctx.candidate, b));
      out["valid"] = best >= 0.5;
      out["reason"] = fmt::format("best component IoU {:.3f}", best);
      break;
    }
    case QueryKind::feedback: {
      if (!ctx.mask) throw ProtocolError("oracle feedback query without current mask");
      const BinMask cur = binarize(*ctx.mask);
      if (cur.rows() != gt.rows() || cur.cols() != gt.cols()) throw ProtocolError("oracle feedback mask size");
      const double score = iou(cur, gt);
      const bool accept = score >= 0.95;
      out["verdict"] = accept ? "accept" : "refine";
      json tags = json::array();
      if (!accept) tags.push_back(cur.count() < gt.count() ? "under_segmented" : "over_segmented");
      out["tags"] = tags;
      out["note"] = fmt::format("IoU {:.3f}", score);
      break;
    }
    case QueryKind::point_labels: {
      json labels = json::array();
      for (const auto& p : ctx.points) {
        if (pixel_set(gt, p.x(), p.y()))
          labels.push_back("positive");
        else if (!ctx.candidate || ctx.candidate->strictly_contains(p.x(), p.y()))
          labels.push_back("negative");
        else
          labels.push_back("discard");
      }
      out["labels"] = labels;
      break;
    }
  }
  return out.dump();
}

GtIntersectSegmenter::GtIntersectSegmenter(BinMask gt, std::string descriptor)
    : truth_(std::move(gt)), descriptor_(std::move(descriptor)) {}

SoftMask GtIntersectSegmenter::segment(const SegmentRequest& req) {
  validate(req);
  const int w = req.image.width;
  const int h = req.image.height;
  const BinMask& gt = truth_.at(w, h);
  BinMask out = gt;
  if (req.points) {
    const Components& comps = truth_.components_at(w, h);
    std::vector<bool> keep(comps.count + 1, false);
    for (const auto& p : req.points->positive) keep[label_at(comps, p.x(), p.y())] = true;
    keep[0] = false;
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) out(y, x) = keep[comps.labels(y, x)];
  }
  if (!req.boxes.empty()) {
    BinMask inside = BinMask::Constant(h, w, false);
    for (const auto& b : req.boxes) inside = inside || box_mask(w, h, b);
    out = out && inside;
  }
  return to_soft(out);
}

SoftMask BoxFillSegmenter::segment(const SegmentRequest& req) {
  validate(req);
  const int w = req.image.width;
  const int h = req.image.height;
  BinMask out = BinMask::Constant(h, w, false);
  for (const auto& b : req.boxes) out = out || box_mask(w, h, b);
  if (req.points && !req.points->positive.empty()) {
    double x0 = w, y0 = h, x1 = 0, y1 = 0;
    for (const auto& p : req.points->positive) {
      x0 = std::min(x0, p.x());
      y0 = std::min(y0, p.y());
      x1 = std::max(x1, p.x());
      y1 = std::max(y1, p.y());
    }
    const BBox grown{static_cast<int>(std::floor(x0)) - margin_, static_cast<int>(std::floor(y0)) - margin_,
                     static_cast<int>(std::ceil(x1)) + margin_, static_cast<int>(std::ceil(y1)) + margin_};
    out = out || box_mask(w, h, grown);
  }
  return to_soft(out);
}

FileDepth::FileDepth(std::filesystem::path root) : root_(std::move(root)) {}

DepthMap FileDepth::estimate(const ImageRgb&, std::string_view image_id) {
  const auto path = root_ / (std::string(image_id) + ".png");
  if (!std::filesystem::exists(path))
    throw MissingDepth(fmt::format("missing depth map for image '{}' ({})", image_id, path.string()));
  return decode_depth_png(read_file(path));
}

}  // namespace argus
