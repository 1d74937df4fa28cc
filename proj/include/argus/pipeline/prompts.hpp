#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "argus/backends/backend.hpp"

namespace argus {

using Slots = std::map<std::string, std::string, std::less<>>;

// Slot names a template may reference as {{name}}.
inline const std::vector<std::string> kPromptSlots = {
    "task_prompt", "inputs",        "image_size",    "scene",  "objects",  "structures", "inference",
    "hypotheses",  "region_label",  "region_box",    "candidate_box", "feedback", "points"};

// Ten templates, one per query kind: p_scene, p_object, p_infer, p_div,
// p_foc, p_hyp, p_scan, p_ver, p_eval, p_gen.
class PromptTemplateSet {
public:
  static PromptTemplateSet defaults();
  // JSON map name -> template; names not in the file keep their defaults.
  static PromptTemplateSet from_json(const nlohmann::json& j);
  static PromptTemplateSet load(const std::filesystem::path& path);

  const std::string& get(std::string_view name) const;
  std::string render(QueryKind kind, const Slots& slots) const;
  nlohmann::ordered_json to_json() const;

private:
  void check() const;
  std::map<std::string, std::string, std::less<>> templates_;
};

std::string_view template_name(QueryKind kind);

// Substitutes {{slot}}; an unknown or missing slot throws ConfigError.
std::string render_template(std::string_view tmpl, const Slots& slots);

}  // namespace argus
