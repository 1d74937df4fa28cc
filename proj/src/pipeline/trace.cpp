#include "argus/pipeline/trace.hpp"

#include <algorithm>

namespace argus {

PipelineTrace::json& PipelineTrace::push(const std::string& stage, const char* call) {
  json rec;
  rec["seq"] = records_.size();
  rec["stage"] = stage;
  rec["call"] = call;
  records_.push_back(std::move(rec));
  return records_.back();
}

void PipelineTrace::vlm(const std::string& stage, QueryKind kind, int attempt, const std::string& prompt,
                        const std::string& raw, json parsed, const std::string& error) {
  json& rec = push(stage, "vlm");
  rec["kind"] = std::string(to_string(kind));
  rec["attempt"] = attempt;
  rec["prompt"] = prompt;
  rec["raw"] = raw;
  rec["parsed"] = std::move(parsed);
  if (!error.empty()) rec["error"] = error;
}

void PipelineTrace::segment(const std::string& stage, json request, const std::string& mask_digest) {
  json& rec = push(stage, "segment");
  rec["request"] = std::move(request);
  rec["mask_digest"] = mask_digest;
}

void PipelineTrace::depth(const std::string& source, const std::string& digest) {
  json& rec = push("prepare", "depth");
  rec["source"] = source;
  rec["depth_digest"] = digest;
}

void PipelineTrace::flag(const std::string& name, const std::string& stage) {
  json& rec = push(stage, "flag");
  rec["flag"] = name;
  if (!has_flag(name)) flags_.push_back(name);
}

void PipelineTrace::note(const std::string& stage, json payload) {
  json& rec = push(stage, "note");
  rec["payload"] = std::move(payload);
}

bool PipelineTrace::has_flag(const std::string& name) const {
  return std::find(flags_.begin(), flags_.end(), name) != flags_.end();
}

std::size_t PipelineTrace::count(const std::string& call) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const json& r) { return r["call"] == call; }));
}

std::size_t PipelineTrace::count_vlm(QueryKind kind) const {
  const std::string k(to_string(kind));
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [&](const json& r) { return r["call"] == "vlm" && r["kind"] == k; }));
}

PipelineTrace::json PipelineTrace::to_json() const {
  json j = header_;
  j["records"] = records_;
  j["flags"] = flags_;
  j["summary"] = summary_;
  return j;
}

std::string PipelineTrace::dump() const { return to_json().dump(2) + "\n"; }

}  // namespace argus
