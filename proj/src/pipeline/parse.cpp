#include "argus/pipeline/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

namespace argus {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& what) { throw ParseError(ParseError::Kind::schema_violation, what); }

// End (one past) of the bracketed value starting at raw[start], or npos.
std::size_t match_bracket(std::string_view raw, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const json* member(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string string_or_empty(const json& j, const char* key) {
  const json* v = member(j, key);
  if (!v || v->is_null()) return {};
  if (!v->is_string()) violation(fmt::format("'{}' must be a string", key));
  return v->get<std::string>();
}

std::vector<std::string> string_list(const json& v, const char* what) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) violation(fmt::format("'{}' must be a list of strings", what));
  for (const auto& s : v) {
    if (!s.is_string()) violation(fmt::format("'{}' must be a list of strings", what));
    out.push_back(s.get<std::string>());
  }
  return out;
}

bool is_box_array(const json& v) {
  return v.is_array() && v.size() == 4 && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
}

}  // namespace

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::no_json: return "no_json";
    case ParseError::Kind::schema_violation: return "schema_violation";
    case ParseError::Kind::out_of_range: return "out_of_range";
  }
  return "unknown";
}

json extract_json(std::string_view raw) {
  for (std::size_t i = raw.find_first_of("{["); i != std::string_view::npos; i = raw.find_first_of("{[", i + 1)) {
    const auto end = match_bracket(raw, i);
    if (end == std::string_view::npos) continue;
    try {
      return json::parse(raw.substr(i, end - i));
    } catch (const json::exception&) {
    }
  }
  throw ParseError(ParseError::Kind::no_json, "no JSON object or array in reply");
}

BBox parse_box(const json& v, int width, int height) {
  if (!is_box_array(v)) violation("box must be four numbers [x0, y0, x1, y1]");
  double c[4];
  for (int i = 0; i < 4; ++i) c[i] = v[i].get<double>();
  if (!std::all_of(c, c + 4, [](double x) { return std::isfinite(x); })) violation("box has non-finite coordinates");
  const bool normalized = std::all_of(c, c + 4, [](double x) { return 0.0 <= x && x <= 1.0; });
  const double sx = normalized ? width : 1.0;
  const double sy = normalized ? height : 1.0;
  const auto r = [](double x) { return static_cast<int>(std::clamp(std::lround(x), -(1L << 30), 1L << 30)); };
  const BBox box = clamp_box({r(c[0] * sx), r(c[1] * sy), r(c[2] * sx), r(c[3] * sy)}, width, height);
  if (box.empty()) throw ParseError(ParseError::Kind::out_of_range, "box is empty after clamping");
  return box;
}

std::string parse_summary(std::string_view raw, std::string_view key) {
  const json j = extract_json(raw);
  const json* v = member(j, std::string(key).c_str());
  if (!v || !v->is_string()) violation(fmt::format("expected {{\"{}\": string}}", key));
  return v->get<std::string>();
}

RegionsPayload parse_regions(std::string_view raw, int width, int height) {
  const json j = extract_json(raw);
  const json* list = j.is_array() ? &j : member(j, "regions");
  if (!list || !list->is_array()) violation("expected a 'regions' list");
  RegionsPayload out;
  for (const auto& item : *list) {
    RegionHint hint;
    if (item.is_string()) {
      hint.description = item.get<std::string>();
    } else if (item.is_object()) {
      hint.description = string_or_empty(item, "description");
      if (const json* b = member(item, "box"); b && !b->is_null()) {
        try {
          hint.coarse_box = parse_box(*b, width, height);
        } catch (const ParseError& e) {
          if (e.kind() != ParseError::Kind::out_of_range) throw;
        }
      }
    } else {
      violation("region entries must be objects or strings");
    }
    out.regions.push_back(std::move(hint));
  }
  if (j.is_object()) {
    if (const json* s = member(j, "structures"); s && !s->is_null()) out.structures = string_list(*s, "structures");
  }
  return out;
}

Orientation parse_orientation_reply(std::string_view raw) {
  const json j = extract_json(raw);
  const json* v = member(j, "orientation");
  if (!v || !v->is_string()) violation("expected {\"orientation\": \"vertical\" | \"horizontal\"}");
  const auto o = parse_orientation(lower(trimmed(v->get<std::string>())));
  if (!o) violation("orientation must be 'vertical' or 'horizontal'");
  return *o;
}

std::vector<BoxHint> parse_boxes(std::string_view raw, int width, int height) {
  const json j = extract_json(raw);
  json list;
  if (is_box_array(j))
    list = json::array({j});
  else if (j.is_array())
    list = j;
  else if (const json* b = member(j, "boxes"); b && b->is_array())
    list = *b;
  else if (member(j, "box"))
    list = json::array({j});
  else
    violation("expected a 'boxes' list");

  std::vector<BoxHint> out;
  std::size_t degenerate = 0;
  for (const auto& item : list) {
    const json* coords = item.is_object() ? member(item, "box") : &item;
    if (!coords) violation("box entry lacks 'box'");
    try {
      out.push_back({parse_box(*coords, width, height), item.is_object() ? string_or_empty(item, "rationale") : ""});
    } catch (const ParseError& e) {
      if (e.kind() != ParseError::Kind::out_of_range) throw;
      ++degenerate;
    }
  }
  if (out.empty() && degenerate > 0) throw ParseError(ParseError::Kind::out_of_range, "every box is degenerate");
  return out;
}

VerificationPayload parse_verification(std::string_view raw) {
  const json j = extract_json(raw);
  const json* v = member(j, "valid");
  if (!v) violation("expected {\"valid\": bool}");
  VerificationPayload out;
  if (v->is_boolean()) {
    out.valid = v->get<bool>();
  } else if (v->is_string()) {
    const std::string s = lower(trimmed(v->get<std::string>()));
    if (s == "true" || s == "yes" || s == "valid")
      out.valid = true;
    else if (s == "false" || s == "no" || s == "invalid")
      out.valid = false;
    else
      violation("'valid' must be a boolean");
  } else {
    violation("'valid' must be a boolean");
  }
  out.reason = string_or_empty(j, "reason");
  return out;
}

FeedbackReport parse_feedback(std::string_view raw) {
  const json j = extract_json(raw);
  const json* v = member(j, "verdict");
  if (!v || !v->is_string()) violation("expected {\"verdict\": \"accept\" | \"refine\"}");
  FeedbackReport out;
  const std::string verdict = lower(trimmed(v->get<std::string>()));
  if (verdict == "accept")
    out.verdict = Verdict::accept;
  else if (verdict == "refine")
    out.verdict = Verdict::refine;
  else
    violation("verdict must be 'accept' or 'refine'");
  if (const json* t = member(j, "tags"); t && !t->is_null()) {
    for (auto tag : string_list(*t, "tags")) {
      tag = lower(trimmed(tag));
      if (std::find(kFeedbackTags.begin(), kFeedbackTags.end(), tag) == kFeedbackTags.end())
        violation("unknown feedback tag '" + tag + "'");
      if (std::find(out.tags.begin(), out.tags.end(), tag) == out.tags.end()) out.tags.push_back(tag);
    }
  }
  out.note = string_or_empty(j, "note");
  return out;
}

std::vector<PointLabel> parse_point_labels(std::string_view raw, std::size_t expected) {
  const json j = extract_json(raw);
  const json* list = j.is_array() ? &j : member(j, "labels");
  if (!list || !list->is_array()) violation("expected a 'labels' list");
  if (list->size() != expected)
    violation(fmt::format("expected {} point labels, got {}", expected, list->size()));
  std::vector<PointLabel> out;
  for (const auto& item : *list) {
    const json* v = item.is_object() ? member(item, "label") : &item;
    if (!v || !v->is_string()) violation("point labels must be strings");
    const std::string s = lower(trimmed(v->get<std::string>()));
    if (s == "positive")
      out.push_back(PointLabel::positive);
    else if (s == "negative")
      out.push_back(PointLabel::negative);
    else if (s == "discard")
      out.push_back(PointLabel::discard);
    else
      violation("point label must be positive, negative or discard");
  }
  return out;
}

std::vector<std::string> parse_hypotheses(std::string_view raw) {
  const json j = extract_json(raw);
  const json* list = j.is_array() ? &j : member(j, "hypotheses");
  if (!list) violation("expected a 'hypotheses' list");
  auto out = string_list(*list, "hypotheses");
  out.erase(std::remove_if(out.begin(), out.end(), [](const std::string& s) { return trimmed(s).empty(); }), out.end());
  if (out.empty()) violation("hypothesis list is empty");
  return out;
}

ordered_json to_json(const RegionsPayload& p) {
  ordered_json regions = ordered_json::array();
  for (const auto& r : p.regions)
    regions.push_back({{"description", r.description},
                       {"box", r.coarse_box ? box_to_json(*r.coarse_box) : ordered_json(nullptr)}});
  return {{"regions", regions}, {"structures", p.structures}};
}

ordered_json to_json(const std::vector<BoxHint>& boxes) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : boxes) arr.push_back({{"box", box_to_json(b.box)}, {"rationale", b.rationale}});
  return {{"boxes", arr}};
}

ordered_json to_json(const VerificationPayload& v) { return {{"valid", v.valid}, {"reason", v.reason}}; }

ordered_json to_json(const std::vector<PointLabel>& labels) {
  ordered_json arr = ordered_json::array();
  for (auto l : labels) arr.push_back(std::string(to_string(l)));
  return {{"labels", arr}};
}

ordered_json parse_structured(std::string_view raw, Schema schema, const ParseContext& ctx) {
  switch (schema) {
    case Schema::summary: return {{ctx.summary_key, parse_summary(raw, ctx.summary_key)}};
    case Schema::regions: return to_json(parse_regions(raw, ctx.width, ctx.height));
    case Schema::orientation: return {{"orientation", std::string(to_string(parse_orientation_reply(raw)))}};
    case Schema::boxes: return to_json(parse_boxes(raw, ctx.width, ctx.height));
    case Schema::verdicts: return to_json(parse_verification(raw));
    case Schema::feedback: return to_json(parse_feedback(raw));
    case Schema::point_labels: return to_json(parse_point_labels(raw, ctx.expected_points));
    case Schema::hypotheses: return {{"hypotheses", parse_hypotheses(raw)}};
  }
  violation("unknown schema");
}

}  // namespace argus
