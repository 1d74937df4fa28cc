#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "argus/metrics.hpp"

namespace argus {

using metrics::MetricValues;

struct RunMeta {
  std::string config_digest;
  std::map<std::string, std::string> backends;  // role -> "kind:descriptor"
  std::string timestamp;
  nlohmann::json extra = nlohmann::json::object();
};

struct EvalReport {
  std::map<std::string, MetricValues> per_image;
  MetricValues means;
  RunMeta meta;
};

// Arithmetic means over a non-empty per-image map.
EvalReport aggregate(std::map<std::string, MetricValues> per_image, RunMeta meta);

nlohmann::json to_json(const MetricValues& v);
MetricValues metric_values_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalReport& report);

// "0.079 & 0.774 & 0.866 & 0.800", optionally followed by F_beta^w.
std::string table_row(const MetricValues& v, bool with_weighted_f = false);

std::string table_header(bool with_weighted_f = false);  // "| M↓ | F_β↑ | E_φ↑ | S_α↑ |"
std::string markdown_row(std::string_view label, const MetricValues& v, bool with_weighted_f = false);
std::string to_markdown(const EvalReport& report, bool with_weighted_f = false);

}  // namespace argus
