#include "weir/grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <vector>

namespace weir {

using nlohmann::json;

namespace {

enum SectionIndex {
  kReflection = 0,
  kPlanStatus,
  kFactCheck,
  kThought,
  kAction,
  kActionInput,
  kSectionCount,
};

constexpr std::array<std::string_view, kSectionCount> kHeaders = {
    kHeaderReflection, kHeaderPlanStatus, kHeaderFactCheck,
    kHeaderThought,    kHeaderAction,     kHeaderActionInput,
};

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct HeaderHit {
  int section;
  std::size_t line_start;     // offset of the header's line
  std::size_t content_start;  // offset just past "Header:"
};

// One hit per line at most; "Action Input:" is tried before "Action:" so the
// longer header wins.
std::vector<HeaderHit> find_headers(std::string_view text) {
  constexpr std::array<int, kSectionCount> kMatchOrder = {
      kActionInput, kPlanStatus, kFactCheck, kReflection, kThought, kAction,
  };

  std::vector<HeaderHit> hits;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();

    std::size_t p = line_start;
    while (p < line_end && (text[p] == ' ' || text[p] == '\t')) ++p;
    for (int section : kMatchOrder) {
      const std::string_view header = kHeaders[section];
      if (line_end - p >= header.size() && iequals(text.substr(p, header.size()), header)) {
        hits.push_back({section, line_start, p + header.size()});
        break;
      }
    }
    line_start = line_end + 1;
  }
  return hits;
}

// First balanced {...} block at or after `from`, honoring JSON string
// escapes. Returns the block's bounds or nothing.
std::optional<std::string_view> balanced_object(std::string_view text, std::size_t from) {
  std::size_t open = text.find('{', from);
  if (open == std::string_view::npos) return std::nullopt;

  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(open, i - open + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ParseFailure::Kind kind) {
  switch (kind) {
    case ParseFailure::Kind::MissingSection: return "MissingSection";
    case ParseFailure::Kind::MalformedActionInput: return "MalformedActionInput";
    case ParseFailure::Kind::UnknownAction: return "UnknownAction";
    case ParseFailure::Kind::EmptyResponse: return "EmptyResponse";
  }
  return "EmptyResponse";
}

ParseResult parse_planner_response(std::string_view text,
                                   const std::set<std::string>& allowed_actions) {
  if (trim(text).empty()) {
    return ParseFailure{ParseFailure::Kind::EmptyResponse, "response is empty or whitespace",
                        std::string(text)};
  }

  const std::vector<HeaderHit> hits = find_headers(text);

  // Last occurrence of each header wins; content runs to the next header line.
  std::array<std::optional<std::size_t>, kSectionCount> chosen;  // index into hits
  for (std::size_t i = 0; i < hits.size(); ++i) chosen[hits[i].section] = i;

  std::string missing;
  for (int s = 0; s < kSectionCount; ++s) {
    if (!chosen[s]) {
      if (!missing.empty()) missing += ", ";
      missing += kHeaders[s].substr(0, kHeaders[s].size() - 1);
    }
  }
  if (!missing.empty()) {
    return ParseFailure{ParseFailure::Kind::MissingSection, "missing section(s): " + missing,
                        std::string(text)};
  }

  auto section_text = [&](int s) {
    const HeaderHit& hit = hits[*chosen[s]];
    std::size_t end = text.size();
    if (*chosen[s] + 1 < hits.size()) end = hits[*chosen[s] + 1].line_start;
    return trim(text.substr(hit.content_start, end - hit.content_start));
  };

  PlannerResponse response;
  response.reflection = section_text(kReflection);
  response.plan_and_status = section_text(kPlanStatus);
  response.fact_check = section_text(kFactCheck);
  response.thought = section_text(kThought);
  response.action_name = section_text(kAction);

  if (response.action_name.empty()) {
    return ParseFailure{ParseFailure::Kind::MissingSection, "Action section is empty",
                        std::string(text)};
  }

  const HeaderHit& input_hit = hits[*chosen[kActionInput]];
  auto block = balanced_object(text, input_hit.content_start);
  if (!block) {
    return ParseFailure{ParseFailure::Kind::MalformedActionInput,
                        "no balanced JSON object after Action Input",
                        section_text(kActionInput)};
  }
  json input = json::parse(*block, nullptr, /*allow_exceptions=*/false);
  if (input.is_discarded() || !input.is_object()) {
    return ParseFailure{ParseFailure::Kind::MalformedActionInput,
                        "Action Input is not a valid JSON object", std::string(*block)};
  }
  response.action_input = std::move(input);

  if (!allowed_actions.contains(response.action_name)) {
    return ParseFailure{ParseFailure::Kind::UnknownAction,
                        "action '" + response.action_name + "' is not available",
                        response.action_name};
  }
  return response;
}

std::string serialize_response(const PlannerResponse& response) {
  std::string out;
  out.reserve(response.reflection.size() + response.plan_and_status.size() +
              response.fact_check.size() + response.thought.size() + 128);
  out += kHeaderReflection;
  out += ' ';
  out += response.reflection;
  out += '\n';
  out += kHeaderPlanStatus;
  out += ' ';
  out += response.plan_and_status;
  out += '\n';
  out += kHeaderFactCheck;
  out += ' ';
  out += response.fact_check;
  out += '\n';
  out += kHeaderThought;
  out += ' ';
  out += response.thought;
  out += '\n';
  out += kHeaderAction;
  out += ' ';
  out += response.action_name;
  out += '\n';
  out += kHeaderActionInput;
  out += ' ';
  out += response.action_input.dump();
  out += '\n';
  return out;
}

std::string canonical_input(const json& input) { return input.dump(); }

}  // namespace weir
