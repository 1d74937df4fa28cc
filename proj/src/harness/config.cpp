#include "argus/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

namespace argus {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

void apply_backend(BackendSpec& b, const json& j, const std::string& role, const fs::path& base) {
  if (!j.is_object()) throw ConfigError(fmt::format("backends.{} must be an object", role));
  for (const auto& [key, v] : j.items()) {
    const std::string where = "backends." + role + "." + key;
    if (key == "kind")
      b.kind = get<std::string>(v, where);
    else if (key == "url")
      b.url = get<std::string>(v, where);
    else if (key == "model")
      b.model = get<std::string>(v, where);
    else if (key == "fixture")
      b.fixture = resolve(base, get<std::string>(v, where));
    else if (key == "root")
      b.root = resolve(base, get<std::string>(v, where));
    else
      throw ConfigError("unknown config key '" + where + "'");
  }
}

void check_kind(const BackendSpec& b, const char* role, std::initializer_list<std::string_view> kinds) {
  if (std::find(kinds.begin(), kinds.end(), b.kind) == kinds.end())
    throw ConfigError(fmt::format("unknown {} backend kind '{}'", role, b.kind));
  if (b.kind == "http" && b.url.empty())
    throw ConfigError(fmt::format("{} backend is http but has no url (set it in the config or via the environment)",
                                  role));
  if (b.kind == "scripted" && b.fixture.empty()) throw ConfigError(fmt::format("{} backend needs a fixture", role));
}

}  // namespace

std::string_view to_string(RunMode m) { return m == RunMode::staged ? "staged" : "sequential"; }

std::optional<RunMode> parse_run_mode(std::string_view text) {
  if (text == "sequential") return RunMode::sequential;
  if (text == "staged") return RunMode::staged;
  return std::nullopt;
}

void RunConfig::validate() const {
  pipeline.validate();
  if (dataset.empty()) throw ConfigError("no dataset given");
  if (output.empty()) throw ConfigError("no output directory given");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (repeat < 1) throw ConfigError("repeat must be >= 1");
  check_kind(vlm, "vlm", {"http", "scripted", "oracle"});
  check_kind(segmenter, "segmenter", {"http", "gt_intersect", "box_fill"});
  if (pipeline.use_depth) check_kind(depth, "depth", {"files", "http", "none"});
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(RunConfig& cfg, const EnvLookup& env) {
  if (auto v = env("ARGUS_VLM_URL")) cfg.vlm.url = *v;
  if (auto v = env("ARGUS_VLM_MODEL")) cfg.vlm.model = *v;
  if (auto v = env("ARGUS_SEG_URL")) cfg.segmenter.url = *v;
  if (auto v = env("ARGUS_DEPTH_URL")) cfg.depth.url = *v;
  if (auto v = env("ARGUS_API_KEY")) cfg.api_key = *v;
}

void apply_json(RunConfig& cfg, const json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "dataset") {
      cfg.dataset = resolve(base, get<std::string>(v, key));
    } else if (key == "output") {
      cfg.output = resolve(base, get<std::string>(v, key));
    } else if (key == "prompts") {
      cfg.prompts = resolve(base, get<std::string>(v, key));
    } else if (key == "pipeline") {
      cfg.pipeline = pipeline_config_from_json(v, cfg.pipeline);
    } else if (key == "mode") {
      const auto m = parse_run_mode(get<std::string>(v, key));
      if (!m) throw ConfigError("mode must be 'sequential' or 'staged'");
      cfg.mode = *m;
    } else if (key == "jobs") {
      cfg.jobs = get<int>(v, key);
    } else if (key == "repeat") {
      cfg.repeat = get<int>(v, key);
    } else if (key == "backends") {
      if (!v.is_object()) throw ConfigError("backends must be an object");
      for (const auto& [role, spec] : v.items()) {
        if (role == "vlm")
          apply_backend(cfg.vlm, spec, role, base);
        else if (role == "segmenter")
          apply_backend(cfg.segmenter, spec, role, base);
        else if (role == "depth")
          apply_backend(cfg.depth, spec, role, base);
        else
          throw ConfigError("unknown backend role '" + role + "'");
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void apply_overrides(RunConfig& cfg, const RunOverrides& o) {
  if (o.dataset) cfg.dataset = *o.dataset;
  if (o.output) cfg.output = *o.output;
  if (o.prompts) cfg.prompts = *o.prompts;
  if (o.mode) cfg.mode = *o.mode;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.repeat) cfg.repeat = *o.repeat;
  if (o.k) cfg.pipeline.k = *o.k;
  if (o.focus) cfg.pipeline.focus_strategy = *o.focus;
  if (o.task_prompt) cfg.pipeline.task_prompt = *o.task_prompt;
  if (o.no_depth) cfg.pipeline.use_depth = false;
  if (o.vlm_kind) cfg.vlm.kind = *o.vlm_kind;
  if (o.vlm_url) cfg.vlm.url = *o.vlm_url;
  if (o.vlm_model) cfg.vlm.model = *o.vlm_model;
  if (o.fixture) cfg.vlm.fixture = *o.fixture;
  if (o.seg_kind) cfg.segmenter.kind = *o.seg_kind;
  if (o.seg_url) cfg.segmenter.url = *o.seg_url;
  if (o.depth_kind) cfg.depth.kind = *o.depth_kind;
  if (o.depth_url) cfg.depth.url = *o.depth_url;
}

RunConfig resolve_run_config(const std::optional<fs::path>& config_file, const RunOverrides& overrides,
                             const EnvLookup& env) {
  RunConfig cfg;
  apply_env(cfg, env);
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw ConfigError("cannot read config file " + config_file->string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("config file {} is not valid JSON: {}", config_file->string(), e.what()));
    }
    apply_json(cfg, j, config_file->parent_path());
  }
  apply_overrides(cfg, overrides);
  if (cfg.depth.kind == "files" && cfg.depth.root.empty() && !cfg.dataset.empty()) cfg.depth.root = cfg.dataset / "depth";
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json to_json(const BackendSpec& b) {
  nlohmann::ordered_json j = {{"kind", b.kind}};
  if (!b.url.empty()) j["url"] = b.url;
  if (!b.model.empty() && b.kind == "http") j["model"] = b.model;
  if (!b.fixture.empty()) j["fixture"] = b.fixture.string();
  if (!b.root.empty()) j["root"] = b.root.string();
  return j;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset"] = cfg.dataset.string();
  j["output"] = cfg.output.string();
  if (cfg.prompts) j["prompts"] = cfg.prompts->string();
  j["pipeline"] = to_json(cfg.pipeline);
  j["mode"] = std::string(to_string(cfg.mode));
  j["jobs"] = cfg.jobs;
  j["repeat"] = cfg.repeat;
  j["backends"] = {{"vlm", to_json(cfg.vlm)}, {"segmenter", to_json(cfg.segmenter)}, {"depth", to_json(cfg.depth)}};
  return j;
}

}  // namespace argus
