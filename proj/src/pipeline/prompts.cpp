#include "argus/pipeline/prompts.hpp"

#include <algorithm>

#include "argus/codec.hpp"

namespace argus {
namespace {

constexpr std::pair<std::string_view, std::string_view> kDefaults[] = {
    {"p_scene",
     "Task: find {{task_prompt}}.\n{{inputs}}\n"
     "Describe the whole scene: setting, lighting, dominant colours and textures, and anything that looks subtly "
     "out of place.\n"
     "Reply with JSON only: {\"scene\": \"<description>\"}"},
    {"p_object",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\n"
     "List every region that might hide a target, and describe the 3D structure of likely targets (body shape, "
     "depth layering, surface relief). When a region can be localised, give its box as [x0, y0, x1, y1] "
     "normalised to [0, 1] over the {{image_size}} image.\n"
     "Reply with JSON only: {\"regions\": [{\"description\": \"...\", \"box\": [x0, y0, x1, y1]}], "
     "\"structures\": [\"...\"]}"},
    {"p_infer",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\nCandidate regions: {{objects}}\n"
     "Structures: {{structures}}\n"
     "Which camouflage mechanisms (background matching, disruptive colouration, mimicry, occlusion) are most "
     "plausible here, and where do they apply?\n"
     "Reply with JSON only: {\"inference\": \"...\"}"},
    {"p_div",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\nInference: {{inference}}\n"
     "Is the most likely target extended top-to-bottom (vertical) or left-to-right (horizontal)?\n"
     "Reply with JSON only: {\"orientation\": \"vertical\"} or {\"orientation\": \"horizontal\"}"},
    {"p_foc",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\nStructures: {{structures}}\n"
     "Inference: {{inference}}\n"
     "Focus on the {{region_label}} region {{region_box}} of the {{image_size}} image. Report every concealed "
     "target lying at least partly inside it, with boxes in full-image coordinates normalised to [0, 1].\n"
     "Reply with JSON only: {\"boxes\": [{\"box\": [x0, y0, x1, y1], \"rationale\": \"...\"}]}; use an empty "
     "list when the region holds no target."},
    {"p_hyp",
     "Task: find {{task_prompt}}.\nScene: {{scene}}\nCandidate regions: {{objects}}\nStructures: {{structures}}\n"
     "Inference: {{inference}}\n"
     "A first scan found nothing. Propose hypotheses about where and how a target could still be hidden.\n"
     "Reply with JSON only: {\"hypotheses\": [\"...\"]}"},
    {"p_scan",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\nHypotheses: {{hypotheses}}\n"
     "Search the {{region_label}} region {{region_box}} of the {{image_size}} image again with these hypotheses "
     "in mind. Report every target lying at least partly inside it, with boxes in full-image coordinates "
     "normalised to [0, 1].\n"
     "Reply with JSON only: {\"boxes\": [{\"box\": [x0, y0, x1, y1], \"rationale\": \"...\"}]}; use an empty "
     "list when the region holds no target."},
    {"p_ver",
     "Task: find {{task_prompt}}.\n{{inputs}}\nScene: {{scene}}\nStructures: {{structures}}\n"
     "Does the candidate box {{candidate_box}} contain a genuine target, or only background?\n"
     "Reply with JSON only: {\"valid\": true, \"reason\": \"...\"} or {\"valid\": false, \"reason\": \"...\"}"},
    {"p_eval",
     "Task: find {{task_prompt}}.\n{{inputs}}\nStructures: {{structures}}\n"
     "The overlay shows the current mask for the target in box {{candidate_box}}. Judge whether it covers the "
     "whole target and nothing else.\n"
     "Reply with JSON only: {\"verdict\": \"accept\" or \"refine\", \"tags\": [zero or more of \"unclear_edges\", "
     "\"missing_center\", \"irregular_shape\", \"over_segmented\", \"under_segmented\"], \"note\": \"...\"}"},
    {"p_gen",
     "Task: find {{task_prompt}}.\n{{inputs}}\nStructures: {{structures}}\nFeedback: {{feedback}}\n"
     "Label each numbered point inside box {{candidate_box}}: positive when it lies on the target's core body, "
     "negative when it lies on background, discard when unsure.\n{{points}}\n"
     "Reply with JSON only: {\"labels\": [\"positive\" | \"negative\" | \"discard\", one per point, in order]}"},
};

}  // namespace

std::string_view template_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::scene: return "p_scene";
    case QueryKind::objects: return "p_object";
    case QueryKind::inference: return "p_infer";
    case QueryKind::orientation: return "p_div";
    case QueryKind::focus: return "p_foc";
    case QueryKind::hypotheses: return "p_hyp";
    case QueryKind::scan: return "p_scan";
    case QueryKind::verify: return "p_ver";
    case QueryKind::feedback: return "p_eval";
    case QueryKind::point_labels: return "p_gen";
  }
  return "";
}

std::string render_template(std::string_view tmpl, const Slots& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw ConfigError("unterminated slot in prompt template");
    const auto name = tmpl.substr(open + 2, close - open - 2);
    const auto it = slots.find(name);
    if (it == slots.end()) throw ConfigError("unresolved prompt slot '{{" + std::string(name) + "}}'");
    out.append(tmpl.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

PromptTemplateSet PromptTemplateSet::defaults() {
  PromptTemplateSet set;
  for (const auto& [name, text] : kDefaults) set.templates_.emplace(name, text);
  return set;
}

PromptTemplateSet PromptTemplateSet::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("prompt template file must be a JSON object");
  PromptTemplateSet set = defaults();
  for (const auto& [name, value] : j.items()) {
    if (!set.templates_.contains(name)) throw ConfigError("unknown prompt template '" + name + "'");
    if (!value.is_string()) throw ConfigError("prompt template '" + name + "' must be a string");
    set.templates_[name] = value.get<std::string>();
  }
  set.check();
  return set;
}

PromptTemplateSet PromptTemplateSet::load(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("prompt template file " + path.string() + ": " + e.what());
  }
}

void PromptTemplateSet::check() const {
  Slots probe;
  for (const auto& s : kPromptSlots) probe[s] = "x";
  for (const auto& [name, text] : templates_) {
    try {
      render_template(text, probe);
    } catch (const ConfigError& e) {
      throw ConfigError("prompt template '" + name + "': " + e.what());
    }
  }
}

const std::string& PromptTemplateSet::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("no prompt template '" + std::string(name) + "'");
  return it->second;
}

std::string PromptTemplateSet::render(QueryKind kind, const Slots& slots) const {
  return render_template(get(template_name(kind)), slots);
}

nlohmann::ordered_json PromptTemplateSet::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [name, _] : kDefaults) j[std::string(name)] = templates_.at(std::string(name));
  return j;
}

}  // namespace argus
