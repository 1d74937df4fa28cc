#include "argus/backends/scripted.hpp"

#include <fmt/format.h>

namespace argus {
namespace {

constexpr QueryKind kAllKinds[] = {QueryKind::scene,      QueryKind::objects, QueryKind::inference,
                                   QueryKind::orientation, QueryKind::focus,   QueryKind::hypotheses,
                                   QueryKind::scan,        QueryKind::verify,  QueryKind::feedback,
                                   QueryKind::point_labels};

ScriptedReply reply_from_json(const nlohmann::json& j) {
  if (j.is_string()) return {j.get<std::string>(), false};
  if (j.is_object() && j.contains("error")) return {j["error"].get<std::string>(), true};
  // any other JSON value is replayed as its compact serialisation
  return {j.dump(), false};
}

std::deque<ScriptedReply> queue_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("scripted replies must be a JSON array");
  std::deque<ScriptedReply> q;
  for (const auto& r : j) q.push_back(reply_from_json(r));
  return q;
}

}  // namespace

std::optional<QueryKind> parse_query_kind(std::string_view text) {
  for (auto k : kAllKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

Script script_from_json(const nlohmann::json& j) {
  Script s;
  if (j.is_array()) {
    s.sequence = queue_from_json(j);
    return s;
  }
  if (!j.is_object()) throw ConfigError("scripted fixture must be an array or an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "sticky") {
      s.sticky = value.get<bool>();
    } else if (key == "sequence") {
      s.sequence = queue_from_json(value);
    } else if (key == "by_kind") {
      const Script nested = script_from_json(value);
      for (const auto& [k, q] : nested.by_kind) s.by_kind[k] = q;
      s.sticky = s.sticky || nested.sticky;
    } else if (auto kind = parse_query_kind(key)) {
      s.by_kind[*kind] = queue_from_json(value);
    } else {
      throw ConfigError("unknown key in scripted fixture: '" + key + "'");
    }
  }
  return s;
}

Script script_from_trace(const nlohmann::json& trace) {
  Script s;
  for (const auto& rec : trace.at("records"))
    if (rec.value("call", "") == "vlm") s.sequence.push_back({rec.at("raw").get<std::string>(), false});
  return s;
}

ScriptedVlm::ScriptedVlm(Script script, std::string descriptor)
    : script_(std::move(script)), descriptor_(std::move(descriptor)) {}

std::string ScriptedVlm::query(const VlmRequest& req) {
  validate(req);
  std::lock_guard lock(mutex_);
  seen_.push_back(req.kind);
  auto it = script_.by_kind.find(req.kind);
  auto& queue = it != script_.by_kind.end() ? it->second : script_.sequence;
  if (queue.empty())
    throw TransportError(fmt::format("scripted backend exhausted at call {} ({})", seen_.size(), to_string(req.kind)));
  const bool keep = script_.sticky && &queue != &script_.sequence && queue.size() == 1;
  ScriptedReply r = queue.front();
  if (!keep) queue.pop_front();
  if (r.transport_error) throw TransportError("scripted fault: " + r.text);
  return r.text;
}

std::size_t ScriptedVlm::calls() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

std::vector<QueryKind> ScriptedVlm::kinds() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

}  // namespace argus
