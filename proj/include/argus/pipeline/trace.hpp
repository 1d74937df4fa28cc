#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/backends/backend.hpp"

namespace argus {

// Append-only record of one image's run. Holds no wall-clock data, so two
// runs with deterministic backends serialise to identical bytes.
class PipelineTrace {
public:
  using json = nlohmann::ordered_json;

  void set_header(json header) { header_ = std::move(header); }

  void vlm(const std::string& stage, QueryKind kind, int attempt, const std::string& prompt, const std::string& raw,
           json parsed, const std::string& error = {});
  void segment(const std::string& stage, json request, const std::string& mask_digest);
  void depth(const std::string& source, const std::string& digest);
  void flag(const std::string& name, const std::string& stage);
  void note(const std::string& stage, json payload);
  void set_summary(json summary) { summary_ = std::move(summary); }

  const std::vector<json>& records() const { return records_; }
  const std::vector<std::string>& flags() const { return flags_; }
  bool has_flag(const std::string& name) const;
  std::size_t count(const std::string& call) const;
  std::size_t count_vlm(QueryKind kind) const;

  json to_json() const;
  std::string dump() const;  // 2-space indented, trailing newline

private:
  json& push(const std::string& stage, const char* call);

  json header_ = json::object();
  json summary_ = json::object();
  std::vector<json> records_;
  std::vector<std::string> flags_;
};

}  // namespace argus
