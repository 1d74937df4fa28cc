#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "argus/pipeline/types.hpp"

namespace argus {

class ParseError : public Error {
public:
  enum class Kind { no_json, schema_violation, out_of_range };
  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

std::string_view to_string(ParseError::Kind kind);

enum class Schema { summary, regions, orientation, boxes, verdicts, feedback, point_labels, hypotheses };

// First JSON object or array in raw text, fenced or bare.
nlohmann::json extract_json(std::string_view raw);

// A box given as four numbers. When all four lie in [0, 1] they are read as
// fractions of the image size and scaled with rounding; otherwise as pixels.
// The result is clamped to the image; an empty box is out_of_range.
BBox parse_box(const nlohmann::json& v, int width, int height);

struct RegionsPayload {
  std::vector<RegionHint> regions;
  std::vector<std::string> structures;
};

struct BoxHint {
  BBox box;
  std::string rationale;
};

struct VerificationPayload {
  bool valid = true;
  std::string reason;
};

std::string parse_summary(std::string_view raw, std::string_view key);
RegionsPayload parse_regions(std::string_view raw, int width, int height);
Orientation parse_orientation_reply(std::string_view raw);
// An empty list is valid; a non-empty list whose boxes are all degenerate is not.
std::vector<BoxHint> parse_boxes(std::string_view raw, int width, int height);
VerificationPayload parse_verification(std::string_view raw);
FeedbackReport parse_feedback(std::string_view raw);
std::vector<PointLabel> parse_point_labels(std::string_view raw, std::size_t expected);
std::vector<std::string> parse_hypotheses(std::string_view raw);

nlohmann::ordered_json to_json(const RegionsPayload& p);
nlohmann::ordered_json to_json(const std::vector<BoxHint>& boxes);
nlohmann::ordered_json to_json(const VerificationPayload& v);
nlohmann::ordered_json to_json(const std::vector<PointLabel>& labels);

struct ParseContext {
  int width = 0;
  int height = 0;
  std::size_t expected_points = 10;
  std::string summary_key = "scene";
};

// Schema-dispatched form of the parsers above, returning the normalised payload.
nlohmann::ordered_json parse_structured(std::string_view raw, Schema schema, const ParseContext& ctx);

}  // namespace argus
