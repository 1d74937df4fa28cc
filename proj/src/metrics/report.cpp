#include "argus/report.hpp"

#include <fmt/format.h>

namespace argus {

EvalReport aggregate(std::map<std::string, MetricValues> per_image, RunMeta meta) {
  if (per_image.empty()) throw DegenerateInput("aggregate: no per-image results");
  MetricValues sum;
  for (const auto& [id, v] : per_image) {
    sum.mae += v.mae;
    sum.f_beta += v.f_beta;
    sum.e_phi += v.e_phi;
    sum.s_alpha += v.s_alpha;
    sum.f_beta_w += v.f_beta_w;
  }
  const auto n = static_cast<double>(per_image.size());
  MetricValues means{sum.mae / n, sum.f_beta / n, sum.e_phi / n, sum.s_alpha / n, sum.f_beta_w / n};
  return {std::move(per_image), means, std::move(meta)};
}

nlohmann::json to_json(const MetricValues& v) {
  return {{"mae", v.mae}, {"f_beta", v.f_beta}, {"e_phi", v.e_phi}, {"s_alpha", v.s_alpha}, {"f_beta_w", v.f_beta_w}};
}

MetricValues metric_values_from_json(const nlohmann::json& j) {
  return {j.at("mae").get<double>(), j.at("f_beta").get<double>(), j.at("e_phi").get<double>(),
          j.at("s_alpha").get<double>(), j.at("f_beta_w").get<double>()};
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_image = nlohmann::json::object();
  for (const auto& [id, v] : report.per_image) per_image[id] = to_json(v);
  nlohmann::json meta = report.meta.extra;
  meta["config_digest"] = report.meta.config_digest;
  meta["backends"] = report.meta.backends;
  meta["timestamp"] = report.meta.timestamp;
  meta["count"] = report.per_image.size();
  return {{"per_image", per_image}, {"means", to_json(report.means)}, {"meta", meta}};
}

std::string table_row(const MetricValues& v, bool with_weighted_f) {
  std::string row = fmt::format("{:.3f} & {:.3f} & {:.3f} & {:.3f}", v.mae, v.f_beta, v.e_phi, v.s_alpha);
  if (with_weighted_f) row += fmt::format(" & {:.3f}", v.f_beta_w);
  return row;
}

std::string table_header(bool with_weighted_f) {
  std::string header = "| M↓ | F_β↑ | E_φ↑ | S_α↑ |";
  if (with_weighted_f) header += " F_β^w↑ |";
  return header;
}

std::string markdown_row(std::string_view label, const MetricValues& v, bool with_weighted_f) {
  std::string row = fmt::format("| {} | {:.3f} | {:.3f} | {:.3f} | {:.3f} |", label, v.mae, v.f_beta, v.e_phi, v.s_alpha);
  if (with_weighted_f) row += fmt::format(" {:.3f} |", v.f_beta_w);
  return row;
}

std::string to_markdown(const EvalReport& report, bool with_weighted_f) {
  const int columns = with_weighted_f ? 5 : 4;
  std::string out = "| Image " + table_header(with_weighted_f) + "\n|---|";
  for (int i = 0; i < columns; ++i) out += "---|";
  out += "\n";
  for (const auto& [id, v] : report.per_image) out += markdown_row(id, v, with_weighted_f) + "\n";
  out += markdown_row("**mean**", report.means, with_weighted_f) + "\n\n";
  out += "Row: `" + table_row(report.means, with_weighted_f) + "`\n";
  return out;
}

}  // namespace argus
