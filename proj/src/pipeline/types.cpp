#include "argus/pipeline/types.hpp"

#include <fmt/format.h>

namespace argus {

void PipelineConfig::validate() const {
  if (k < 1) throw ConfigError(fmt::format("k must be >= 1 (got {})", k));
  if (n_focus != 3) throw ConfigError(fmt::format("n_focus must be 3 (got {})", n_focus));
  if (n_hypothesis != 6) throw ConfigError(fmt::format("n_hypothesis must be 6 (got {})", n_hypothesis));
  if (resize_limit < 1) throw ConfigError("resize_limit must be >= 1");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0))
    throw ConfigError("binarize_threshold must lie in [0, 1]");
  if (max_parse_retries < 0) throw ConfigError("max_parse_retries must be >= 0");
  if (max_tokens < 0) throw ConfigError("max_tokens must be >= 0");
  if (task_prompt.empty()) throw ConfigError("task_prompt must not be empty");
}

nlohmann::ordered_json to_json(const PipelineConfig& cfg) {
  return {{"task_prompt", cfg.task_prompt},
          {"n_focus", cfg.n_focus},
          {"n_hypothesis", cfg.n_hypothesis},
          {"k", cfg.k},
          {"focus_strategy", std::string(to_string(cfg.focus_strategy))},
          {"resize_limit", cfg.resize_limit},
          {"binarize_threshold", cfg.binarize_threshold},
          {"max_parse_retries", cfg.max_parse_retries},
          {"use_depth", cfg.use_depth},
          {"max_tokens", cfg.max_tokens}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig cfg) {
  if (!j.is_object()) throw ConfigError("pipeline section must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "task_prompt")
        cfg.task_prompt = v.get<std::string>();
      else if (key == "n_focus")
        cfg.n_focus = v.get<int>();
      else if (key == "n_hypothesis")
        cfg.n_hypothesis = v.get<int>();
      else if (key == "k")
        cfg.k = v.get<int>();
      else if (key == "focus_strategy") {
        const auto s = parse_focus_strategy(v.get<std::string>());
        if (!s) throw ConfigError("unknown focus_strategy '" + v.get<std::string>() + "'");
        cfg.focus_strategy = *s;
      } else if (key == "resize_limit")
        cfg.resize_limit = v.get<int>();
      else if (key == "binarize_threshold")
        cfg.binarize_threshold = v.get<double>();
      else if (key == "max_parse_retries")
        cfg.max_parse_retries = v.get<int>();
      else if (key == "use_depth")
        cfg.use_depth = v.get<bool>();
      else if (key == "max_tokens")
        cfg.max_tokens = v.get<int>();
      else
        throw ConfigError("unknown pipeline key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline section: ") + e.what());
  }
  return cfg;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::direct: return "direct";
    case Provenance::hypothesis: return "hypothesis";
    case Provenance::fallback: return "fallback";
  }
  return "unknown";
}

std::string_view to_string(PointLabel l) {
  switch (l) {
    case PointLabel::positive: return "positive";
    case PointLabel::negative: return "negative";
    case PointLabel::discard: return "discard";
  }
  return "unknown";
}

nlohmann::ordered_json box_to_json(const BBox& b) { return nlohmann::ordered_json::array({b.x0, b.y0, b.x1, b.y1}); }

nlohmann::ordered_json to_json(const SceneCognition& g) {
  nlohmann::ordered_json regions = nlohmann::ordered_json::array();
  for (const auto& r : g.candidate_regions)
    regions.push_back({{"description", r.description},
                       {"box", r.coarse_box ? box_to_json(*r.coarse_box) : nlohmann::ordered_json(nullptr)}});
  return {{"scene", g.scene_summary},
          {"regions", regions},
          {"structures", g.structures},
          {"inference", g.camouflage_inference},
          {"degraded", g.degraded}};
}

nlohmann::ordered_json to_json(const CandidateSet& c) {
  nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
  for (const auto& b : c.boxes)
    boxes.push_back(
        {{"box", box_to_json(b.box)}, {"provenance", std::string(to_string(b.provenance))}, {"rationale", b.rationale}});
  return {{"boxes", boxes}, {"fallback", c.fallback}};
}

nlohmann::ordered_json to_json(const FeedbackReport& f) {
  return {{"verdict", f.verdict == Verdict::accept ? "accept" : "refine"}, {"tags", f.tags}, {"note", f.note}};
}

}  // namespace argus
