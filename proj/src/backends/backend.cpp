#include "argus/backends/backend.hpp"

#include <fmt/format.h>

namespace argus {

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::scene: return "scene";
    case QueryKind::objects: return "objects";
    case QueryKind::inference: return "inference";
    case QueryKind::orientation: return "orientation";
    case QueryKind::focus: return "focus";
    case QueryKind::hypotheses: return "hypotheses";
    case QueryKind::scan: return "scan";
    case QueryKind::verify: return "verify";
    case QueryKind::feedback: return "feedback";
    case QueryKind::point_labels: return "point_labels";
  }
  return "unknown";
}

void validate(const VlmRequest& req) {
  if (req.text.empty()) throw ProtocolError("vlm request has no text part");
  if (req.images.size() > 4) throw ProtocolError(fmt::format("vlm request carries {} images (max 4)", req.images.size()));
  for (const auto& im : req.images) {
    if (const auto* d = std::get_if<DepthMap>(&im.content)) {
      if (d->size() == 0 || d->minCoeff() < 0.0 || d->maxCoeff() > 1.0)
        throw ProtocolError("depth image values must lie in [0, 1]");
    }
  }
}

void validate(const SegmentRequest& req) {
  const bool has_points = req.points && (!req.points->positive.empty() || !req.points->negative.empty());
  if (req.boxes.empty() && !has_points) throw ProtocolError("segment request needs boxes or points");
  if (req.points && (req.points->positive.size() > 10 || req.points->negative.size() > 10))
    throw ProtocolError("segment request carries more than 10 points of one polarity");
  if (req.depth) require_image_shape(*req.depth, req.image, "segment request depth");
  for (const auto& b : req.boxes)
    if (!b.within(req.image.width, req.image.height))
      throw ProtocolError(fmt::format("segment box ({},{},{},{}) outside {}x{} image", b.x0, b.y0, b.x1, b.y1,
                                      req.image.width, req.image.height));
}

}  // namespace argus
