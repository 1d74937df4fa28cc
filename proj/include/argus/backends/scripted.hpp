#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/backends/backend.hpp"

namespace argus {

struct ScriptedReply {
  std::string text;
  bool transport_error = false;  // raise TransportError(text) instead of answering
};

// Fixture JSON accepted by script_from_json:
//   ["r1", "r2", {"error": "boom"}]                 one shared queue
//   {"scene": ["..."], "focus": [...], ...}           one queue per query kind
//   {"sequence": [...], "by_kind": {...}}             both; by_kind wins when it has the kind
// "sticky": true keeps the last reply of each per-kind queue instead of running dry.
struct Script {
  std::deque<ScriptedReply> sequence;
  std::map<QueryKind, std::deque<ScriptedReply>> by_kind;
  bool sticky = false;
};

Script script_from_json(const nlohmann::json& j);
// Replies recorded in a pipeline trace, in call order.
Script script_from_trace(const nlohmann::json& trace);

class ScriptedVlm final : public VisionLanguageModel {
public:
  explicit ScriptedVlm(Script script, std::string descriptor = "inline");
  std::string query(const VlmRequest& req) override;
  BackendId id() const override { return {"scripted", descriptor_}; }

  std::size_t calls() const;
  std::vector<QueryKind> kinds() const;

private:
  mutable std::mutex mutex_;
  Script script_;
  std::string descriptor_;
  std::vector<QueryKind> seen_;
};

std::optional<QueryKind> parse_query_kind(std::string_view text);

}  // namespace argus
