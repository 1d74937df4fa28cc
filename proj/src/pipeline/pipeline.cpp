#include "argus/pipeline/pipeline.hpp"

#include <fmt/format.h>

#include "argus/codec.hpp"
#include "argus/mask_ops.hpp"
#include "argus/overlay.hpp"
#include "argus/pipeline/parse.hpp"
#include "argus/resize.hpp"

namespace argus {
namespace {

using json = nlohmann::ordered_json;

json payload(const std::string& s) { return s; }
json payload(Orientation o) { return {{"orientation", std::string(to_string(o))}}; }
json payload(const std::vector<std::string>& hypotheses) { return {{"hypotheses", hypotheses}}; }
json payload(const RegionsPayload& p) { return to_json(p); }
json payload(const std::vector<BoxHint>& b) { return to_json(b); }
json payload(const VerificationPayload& v) { return to_json(v); }
json payload(const FeedbackReport& f) { return to_json(f); }
json payload(const std::vector<PointLabel>& l) { return to_json(l); }

std::string describe_role(const std::string& role) {
  if (role == "rgb") return "the RGB photo";
  if (role == "depth") return "its depth map (brighter is nearer)";
  if (role == "region") return "a crop of the focused region";
  if (role == "candidate") return "a crop of the candidate box";
  if (role == "mask_overlay") return "the photo with the current mask tinted red and outlined in yellow";
  return role;
}

std::string normalized_box(const BBox& b, int w, int h) {
  return fmt::format("[{:.3f}, {:.3f}, {:.3f}, {:.3f}]", static_cast<double>(b.x0) / w, static_cast<double>(b.y0) / h,
                     static_cast<double>(b.x1) / w, static_cast<double>(b.y1) / h);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep, std::string_view empty) {
  if (parts.empty()) return std::string(empty);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string feedback_text(const FeedbackReport& f) {
  std::string s = f.verdict == Verdict::accept ? "accept" : "refine";
  if (!f.tags.empty()) s += " (" + join(f.tags, ", ", "") + ")";
  if (!f.note.empty()) s += "; " + f.note;
  return s;
}

json points_json(const std::vector<Eigen::Vector2d>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.x(), p.y()}));
  return arr;
}

// Query helper bound to one frame: builds requests, applies the parse-retry
// policy and records every attempt.
class Dialogue {
public:
  Dialogue(const Frame& frame, const StageContext& ctx) : frame_(frame), ctx_(ctx) {}

  Slots base_slots() const {
    return {{"task_prompt", ctx_.cfg.task_prompt}, {"image_size", fmt::format("{}x{}", frame_.width(), frame_.height())}};
  }

  std::vector<VlmImage> images(bool visual, std::vector<VlmImage> extra = {}) const {
    std::vector<VlmImage> out;
    if (!visual) return out;
    out.push_back({"rgb", frame_.image});
    if (frame_.depth) out.push_back({"depth", *frame_.depth});
    for (auto& e : extra) out.push_back(std::move(e));
    return out;
  }

  template <typename Parse>
  auto ask(const std::string& stage, QueryKind kind, Slots slots, std::vector<VlmImage> imgs, QueryContext qctx,
           Parse parse) -> std::optional<decltype(parse(std::string_view{}))> {
    std::vector<std::string> roles;
    for (std::size_t i = 0; i < imgs.size(); ++i)
      roles.push_back(fmt::format("{}) {}", i + 1, describe_role(imgs[i].role)));
    slots["inputs"] = imgs.empty() ? "No images are attached." : "Attached images: " + join(roles, "; ", "") + ".";
    qctx.image_width = frame_.width();
    qctx.image_height = frame_.height();

    VlmRequest req;
    req.text = ctx_.prompts.render(kind, slots);
    req.images = std::move(imgs);
    req.decode.max_tokens = ctx_.cfg.max_tokens;
    req.kind = kind;
    req.context = std::move(qctx);

    for (int attempt = 0; attempt <= ctx_.cfg.max_parse_retries; ++attempt) {
      std::string raw;
      try {
        raw = ctx_.vlm.query(req);
      } catch (const TransportError& e) {
        ctx_.trace.vlm(stage, kind, attempt, req.text, "", nullptr, std::string("transport: ") + e.what());
        throw TransportError(stage + ": " + e.what());
      } catch (const ProtocolError& e) {
        ctx_.trace.vlm(stage, kind, attempt, req.text, "", nullptr, std::string("protocol: ") + e.what());
        throw ProtocolError(stage + ": " + e.what());
      }
      try {
        auto value = parse(std::string_view(raw));
        ctx_.trace.vlm(stage, kind, attempt, req.text, raw, payload(value));
        return value;
      } catch (const ParseError& e) {
        ctx_.trace.vlm(stage, kind, attempt, req.text, raw, nullptr,
                       fmt::format("{}: {}", to_string(e.kind()), e.what()));
      }
    }
    ctx_.trace.flag("parse_failure", stage);
    return std::nullopt;
  }

private:
  const Frame& frame_;
  const StageContext& ctx_;
};

Slots cognition_slots(Slots s, const SceneCognition& g) {
  std::vector<std::string> objects;
  for (const auto& r : g.candidate_regions) objects.push_back(r.description);
  s["scene"] = g.scene_summary.empty() ? "(unavailable)" : g.scene_summary;
  s["objects"] = join(objects, "; ", "(none identified)");
  s["structures"] = join(g.structures, "; ", "(unavailable)");
  s["inference"] = g.camouflage_inference.empty() ? "(unavailable)" : g.camouflage_inference;
  return s;
}

SoftMask call_segmenter(Segmenter& seg, const SegmentRequest& req, PipelineTrace& trace, const std::string& stage) {
  json request;
  json boxes = json::array();
  for (const auto& b : req.boxes) boxes.push_back(box_to_json(b));
  request["boxes"] = boxes;
  if (req.points)
    request["points"] = {{"positive", points_json(req.points->positive)},
                         {"negative", points_json(req.points->negative)}};
  request["depth"] = req.depth.has_value();
  SoftMask m;
  try {
    m = seg.segment(req);
  } catch (const TransportError& e) {
    trace.segment(stage, request, "");
    throw TransportError(stage + ": " + e.what());
  } catch (const Error& e) {
    trace.segment(stage, request, "");
    throw ProtocolError(stage + ": " + e.what());
  }
  if (m.rows() != req.image.height || m.cols() != req.image.width)
    throw ProtocolError(fmt::format("{}: segmenter returned {}x{} for a {}x{} image", stage, m.cols(), m.rows(),
                                    req.image.width, req.image.height));
  m = m.cwiseMax(0.0).cwiseMin(1.0);
  trace.segment(stage, request, mask_digest(m));
  return m;
}

}  // namespace

std::vector<Candidate> deduplicate(std::vector<Candidate> boxes, double iou_threshold) {
  std::vector<Candidate> out;
  for (auto& c : boxes) {
    bool merged = false;
    for (auto& kept : out) {
      if (box_iou(kept.box, c.box) >= iou_threshold) {
        kept.box = box_union(kept.box, c.box);
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(c));
  }
  // a widened box may now overlap an earlier one; repeat until stable
  if (out.size() < boxes.size() && out.size() > 1) return deduplicate(std::move(out), iou_threshold);
  return out;
}

SceneCognition run_conjecture(const Frame& frame, const StageContext& ctx) {
  Dialogue d(frame, ctx);
  SceneCognition g;

  auto scene = d.ask("conjecture.scene", QueryKind::scene, d.base_slots(), d.images(true), {},
                     [](std::string_view raw) { return parse_summary(raw, "scene"); });
  if (scene) g.scene_summary = *scene;

  Slots s = cognition_slots(d.base_slots(), g);
  auto objects = d.ask("conjecture.objects", QueryKind::objects, s, d.images(true), {},
                       [&](std::string_view raw) { return parse_regions(raw, frame.width(), frame.height()); });
  if (objects) {
    g.candidate_regions = objects->regions;
    g.structures = objects->structures;
  }

  s = cognition_slots(d.base_slots(), g);
  auto inference = d.ask("conjecture.inference", QueryKind::inference, s, d.images(false), {},
                         [](std::string_view raw) { return parse_summary(raw, "inference"); });
  if (inference) g.camouflage_inference = *inference;

  g.degraded = !scene || !objects || !inference;
  if (g.degraded) ctx.trace.flag("degraded_cognition", "conjecture");
  if (g.candidate_regions.empty()) ctx.trace.flag("empty_regions", "conjecture");
  ctx.trace.note("conjecture.result", to_json(g));
  return g;
}

CandidateSet run_focus(const Frame& frame, const SceneCognition& g3d, const StageContext& ctx) {
  Dialogue d(frame, ctx);
  const int w = frame.width();
  const int h = frame.height();
  CandidateSet result;

  if (w < 3 || h < 3) {
    ctx.trace.flag("image_too_small_to_decompose", "focus");
  } else {
    Orientation orientation = fallback_orientation(w, h);
    if (ctx.cfg.focus_strategy == FocusStrategy::automatic) {
      auto o = d.ask("focus.orientation", QueryKind::orientation, cognition_slots(d.base_slots(), g3d),
                     d.images(true), {}, [](std::string_view raw) { return parse_orientation_reply(raw); });
      if (o)
        orientation = *o;
      else
        ctx.trace.flag("orientation_fallback", "focus.orientation");
    }

    const auto scan = [&](const std::vector<Region>& regions, QueryKind kind, const std::string& prefix,
                          Provenance provenance, const Slots& slots) {
      std::vector<Candidate> found;
      for (const auto& r : regions) {
        Slots s = slots;
        s["region_label"] = std::string(to_string(r.label));
        s["region_box"] = normalized_box(r.box, w, h);
        QueryContext q;
        q.region = r.box;
        auto boxes = d.ask(prefix + "." + std::string(to_string(r.label)), kind, s,
                           d.images(true, {{"region", crop(frame.image, r.box)}}), q,
                           [&](std::string_view raw) { return parse_boxes(raw, w, h); });
        if (!boxes) continue;
        for (const auto& b : *boxes) found.push_back({b.box, provenance, b.rationale});
      }
      return found;
    };

    const Slots base = cognition_slots(d.base_slots(), g3d);
    std::vector<Candidate> chosen =
        scan(decompose_regions(w, h, ctx.cfg.focus_strategy, orientation), QueryKind::focus, "focus.direct",
             Provenance::direct, base);

    if (chosen.empty()) {
      ctx.trace.flag("hypothesis_branch", "focus.hypotheses");
      auto hyps = d.ask("focus.hypotheses", QueryKind::hypotheses, base, d.images(false), {},
                        [](std::string_view raw) { return parse_hypotheses(raw); });
      const std::vector<std::string> hypotheses = hyps ? *hyps : std::vector<std::string>{ctx.cfg.task_prompt};
      Slots s = base;
      s["hypotheses"] = join(hypotheses, "; ", "");
      chosen = scan(decompose_regions(w, h, FocusStrategy::double_split), QueryKind::scan, "focus.scan",
                    Provenance::hypothesis, s);
    }

    for (auto& c : deduplicate(std::move(chosen))) {
      Slots s = base;
      s["candidate_box"] = normalized_box(c.box, w, h);
      QueryContext q;
      q.candidate = c.box;
      auto v = d.ask("focus.verify", QueryKind::verify, s, d.images(true, {{"candidate", crop(frame.image, c.box)}}),
                     q, [](std::string_view raw) { return parse_verification(raw); });
      // an unreadable verdict keeps the candidate
      if (!v || v->valid) result.boxes.push_back(std::move(c));
    }
  }

  if (result.boxes.empty()) {
    result.boxes.push_back({full_box(w, h), Provenance::fallback, "no candidate survived"});
    result.fallback = true;
    ctx.trace.flag("fallback_full_image", "focus");
  }
  ctx.trace.note("focus.result", to_json(result));
  return result;
}

SoftMask run_sculpting(const Frame& frame, const SceneCognition& g3d, const CandidateSet& cands,
                       const StageContext& ctx, Segmenter& seg, std::vector<SculptState>* states) {
  if (cands.boxes.empty()) throw DegenerateInput("run_sculpting needs at least one candidate");
  Dialogue d(frame, ctx);
  const int w = frame.width();
  const int h = frame.height();
  const std::optional<DepthMap> seg_depth = ctx.cfg.use_depth ? frame.depth : std::nullopt;
  const Slots base = cognition_slots(d.base_slots(), g3d);

  std::vector<SoftMask> masks;
  for (std::size_t ci = 0; ci < cands.boxes.size(); ++ci) {
    const Candidate& cand = cands.boxes[ci];
    const std::string tag = fmt::format("sculpt.c{}", ci);
    SculptState st;
    st.box = cand.box;
    st.current_mask = call_segmenter(seg, {frame.image, seg_depth, {cand.box}, std::nullopt}, ctx.trace, tag + ".init");

    for (int i = 1; i <= ctx.cfg.k; ++i) {
      st.iteration = i;
      const std::string it = fmt::format("{}.i{}", tag, i);
      const BinMask current = binarize(st.current_mask, ctx.cfg.binarize_threshold);
      const ImageRgb overlay = render_overlay(frame.image, current);

      Slots s = base;
      s["candidate_box"] = normalized_box(cand.box, w, h);
      QueryContext q;
      q.candidate = cand.box;
      q.mask = st.current_mask;
      auto fb = d.ask(it + ".feedback", QueryKind::feedback, s, d.images(true, {{"mask_overlay", overlay}}), q,
                      [](std::string_view raw) { return parse_feedback(raw); });
      st.feedback = fb ? *fb : FeedbackReport{Verdict::refine, {}, "feedback unavailable"};
      if (st.feedback->verdict == Verdict::accept) break;

      const BBox grid_box = tight_box(current).value_or(cand.box);
      const auto grid = point_grid(grid_box);
      std::string listing;
      for (std::size_t p = 0; p < grid.size(); ++p)
        listing += fmt::format("{}{}: ({:.1f}, {:.1f})", p ? "\n" : "", p + 1, grid[p].x(), grid[p].y());
      s["candidate_box"] = normalized_box(grid_box, w, h);
      s["feedback"] = feedback_text(*st.feedback);
      s["points"] = listing;
      q.candidate = grid_box;
      q.points = grid;
      auto labels = d.ask(it + ".points", QueryKind::point_labels, s, d.images(true, {{"mask_overlay", overlay}}), q,
                          [&](std::string_view raw) { return parse_point_labels(raw, grid.size()); });
      if (!labels) break;

      PointPrompts prompts;
      st.points.clear();
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto l = (*labels)[p];
        if (l == PointLabel::discard) continue;
        const auto pol = l == PointLabel::positive ? Polarity::positive : Polarity::negative;
        st.points.push_back({grid[p].x(), grid[p].y(), pol});
        (pol == Polarity::positive ? prompts.positive : prompts.negative).push_back(grid[p]);
      }
      if (prompts.positive.empty()) {
        ctx.trace.note(it + ".points", {{"stop", "no positive points"}});
        break;
      }
      st.current_mask = call_segmenter(seg, {frame.image, seg_depth, {}, prompts}, ctx.trace, it + ".segment");
    }
    masks.push_back(st.current_mask);
    if (states) states->push_back(std::move(st));
  }
  return merge_masks(masks);
}

ImageRun::ImageRun(std::string image_id, ImageRgb image, std::optional<DepthMap> depth, PipelineConfig cfg,
                   PromptTemplateSet prompts, Backends backends)
    : id_(std::move(image_id)),
      original_(std::move(image)),
      given_depth_(std::move(depth)),
      cfg_(std::move(cfg)),
      prompts_(std::move(prompts)),
      backends_(std::move(backends)) {
  cfg_.validate();
  if (!backends_.vlm || !backends_.segmenter) throw ConfigError("pipeline needs a VLM and a segmenter backend");
}

StageContext ImageRun::context() { return {cfg_, prompts_, *backends_.vlm, trace_}; }

void ImageRun::expect(Step s) const {
  if (step_ != s) throw Error("pipeline step called out of order for image " + id_);
}

void ImageRun::prepare() {
  expect(Step::prepare);
  auto resized = resize_longest_side(original_, cfg_.resize_limit);
  frame_.image = std::move(resized.image);
  scale_ = resized.scale;

  json backends;
  backends["vlm"] = backends_.vlm->id().str();
  backends["segmenter"] = backends_.segmenter->id().str();
  backends["depth"] = cfg_.use_depth && backends_.depth ? json(backends_.depth->id().str()) : json(nullptr);
  trace_.set_header({{"image_id", id_},
                     {"original_size", {original_.width, original_.height}},
                     {"working_size", {frame_.width(), frame_.height()}},
                     {"scale", scale_},
                     {"config", to_json(cfg_)},
                     {"backends", backends}});

  if (cfg_.use_depth) {
    DepthMap depth;
    std::string source;
    if (given_depth_) {
      require_image_shape(*given_depth_, original_, "input depth");
      depth = *given_depth_;
      source = "input";
    } else if (backends_.depth) {
      try {
        depth = backends_.depth->estimate(frame_.image, id_);
      } catch (const TransportError& e) {
        throw TransportError(std::string("prepare.depth: ") + e.what());
      }
      source = backends_.depth->id().str();
    } else {
      throw MissingDepth("use_depth is on but no depth source is configured for image '" + id_ + "'");
    }
    if (depth.rows() != frame_.height() || depth.cols() != frame_.width())
      depth = resize_mask(depth, frame_.height(), frame_.width());
    else
      depth = depth.cwiseMax(0.0).cwiseMin(1.0);
    trace_.depth(source, mask_digest(depth));
    frame_.depth = std::move(depth);
  }
  step_ = Step::conjecture;
}

void ImageRun::conjecture() {
  expect(Step::conjecture);
  g3d_ = run_conjecture(frame_, context());
  step_ = Step::focus;
}

void ImageRun::focus() {
  expect(Step::focus);
  candidates_ = run_focus(frame_, g3d_, context());
  step_ = Step::sculpt;
}

void ImageRun::sculpt() {
  expect(Step::sculpt);
  working_mask_ = run_sculpting(frame_, g3d_, candidates_, context(), *backends_.segmenter);
  step_ = Step::done;
}

PipelineResult ImageRun::finish() {
  expect(Step::done);
  PipelineResult out;
  if (working_mask_.rows() != original_.height || working_mask_.cols() != original_.width)
    out.mask = resize_mask(working_mask_, original_.height, original_.width);
  else
    out.mask = working_mask_;
  trace_.set_summary({{"cognition", to_json(g3d_)},
                      {"candidates", to_json(candidates_)},
                      {"working_mask_digest", mask_digest(working_mask_)},
                      {"final_mask_digest", mask_digest(out.mask)}});
  out.trace = std::move(trace_);
  trace_ = PipelineTrace{};
  return out;
}

PipelineResult ImageRun::run() {
  prepare();
  conjecture();
  focus();
  sculpt();
  return finish();
}

PipelineResult run_pipeline(const std::string& image_id, const ImageRgb& img, const std::optional<DepthMap>& depth,
                            const PipelineConfig& cfg, const PromptTemplateSet& prompts, const Backends& backends) {
  return ImageRun(image_id, img, depth, cfg, prompts, backends).run();
}

}  // namespace argus
