#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mapnav/jsonio.hpp"
#include "mapnav/util.hpp"

namespace mapnav {

// Undefined carries verbs the model invented; they parse in the JSON object
// form and fail later with an unknown_action verdict.
enum class Verb { ApproachDoor, OpenDoor, GoThrough, GoTo, Undefined };

inline const char* to_string(Verb v) {
  switch (v) {
    case Verb::ApproachDoor: return "ApproachDoor";
    case Verb::OpenDoor: return "OpenDoor";
    case Verb::GoThrough: return "GoThrough";
    case Verb::GoTo: return "GoTo";
    case Verb::Undefined: return "Undefined";
  }
  return "Undefined";
}

inline std::optional<Verb> verb_from_string(std::string_view s) {
  if (s == "ApproachDoor") return Verb::ApproachDoor;
  if (s == "OpenDoor") return Verb::OpenDoor;
  if (s == "GoThrough") return Verb::GoThrough;
  if (s == "GoTo") return Verb::GoTo;
  return std::nullopt;
}

// Strict is the three-verb door grammar; Extended adds GoTo(room).
enum class Profile { Strict, Extended };

inline const char* to_string(Profile p) {
  return p == Profile::Strict ? "strict" : "extended";
}

struct Action {
  Verb verb = Verb::Undefined;
  std::string target;
  std::string raw_verb;  // original spelling, kept when verb == Undefined

  std::string display() const {
    std::string v = verb == Verb::Undefined ? raw_verb : to_string(verb);
    return v + "(" + target + ")";
  }
};

inline bool operator==(const Action& a, const Action& b) {
  return a.verb == b.verb && a.target == b.target && a.raw_verb == b.raw_verb;
}

struct Plan {
  std::vector<Action> actions;
  Profile profile = Profile::Strict;

  size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
};

inline bool operator==(const Plan& a, const Plan& b) { return a.actions == b.actions; }

enum class Outcome {
  Correct,
  UnknownAction,
  UnknownTarget,
  InfeasibleAction,
  GoalNotReached,
  Malformed,
};

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Correct: return "correct";
    case Outcome::UnknownAction: return "unknown_action";
    case Outcome::UnknownTarget: return "unknown_target";
    case Outcome::InfeasibleAction: return "infeasible_action";
    case Outcome::GoalNotReached: return "goal_not_reached";
    case Outcome::Malformed: return "malformed";
  }
  return "malformed";
}

// failing_index is the offending action index for validation outcomes. For
// malformed it is the byte offset (JSON input), the 1-based line number (line
// input), or the plan element index (structural issues); detail says which.
struct Verdict {
  Outcome outcome = Outcome::Malformed;
  std::optional<size_t> failing_index;
  std::vector<std::string> trace;  // room ids visited, starting room first
  std::string detail;

  bool correct() const { return outcome == Outcome::Correct; }

  static Verdict malformed(std::string detail, std::optional<size_t> where = std::nullopt) {
    Verdict v;
    v.outcome = Outcome::Malformed;
    v.failing_index = where;
    v.detail = std::move(detail);
    return v;
  }
};

inline Json verdict_to_json(const Verdict& v) {
  Json j;
  j["outcome"] = to_string(v.outcome);
  if (v.failing_index) j["failing_index"] = *v.failing_index;
  j["trace"] = v.trace;
  j["detail"] = v.detail;
  return j;
}

struct ParseResult {
  bool ok = false;
  Plan plan;
  Verdict verdict;  // meaningful when !ok

  static ParseResult success(Plan p) {
    ParseResult r;
    r.ok = true;
    r.plan = std::move(p);
    return r;
  }
  static ParseResult failure(Verdict v) {
    ParseResult r;
    r.verdict = std::move(v);
    return r;
  }
};

namespace detail {

// Trims, collapses whitespace, and drops a redundant leading "door"/"room"
// qualifier so "door D3" and "D3" refer to the same target.
inline std::string normalize_target(Verb verb, std::string_view raw) {
  std::string t = collapse_ws(raw);
  if (verb == Verb::GoTo) return strip_leading_word_ci(t, "room");
  if (verb == Verb::ApproachDoor || verb == Verb::OpenDoor || verb == Verb::GoThrough) {
    return strip_leading_word_ci(t, "door");
  }
  return t;
}

// Finds the end of the balanced JSON value opening at text[start] ('{' or
// '['), honoring strings and escapes. Returns npos when unbalanced.
inline size_t balanced_end(std::string_view text, size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < text.size(); ++i) {
    char c = text[i];
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
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
      if (depth == 0) return i;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

// Parses a single "Verb(Target)" atom. Returns nullopt on shape errors with
// `why` set. Unknown verbs are shape errors here; the JSON object form is the
// only place undefined verbs survive parsing.
inline std::optional<Action> parse_action_atom(std::string_view line, Profile profile,
                                               std::string& why) {
  std::string s = trim(line);
  size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    why = "expected Verb(Target)";
    return std::nullopt;
  }
  std::string verb_text = trim(std::string_view(s).substr(0, open));
  std::string target_text = std::string(s.substr(open + 1, s.size() - open - 2));
  if (target_text.find('(') != std::string::npos || target_text.find(')') != std::string::npos) {
    why = "nested parentheses in target";
    return std::nullopt;
  }
  auto verb = verb_from_string(verb_text);
  if (!verb) {
    why = "unknown action verb '" + verb_text + "'";
    return std::nullopt;
  }
  if (*verb == Verb::GoTo && profile == Profile::Strict) {
    why = "GoTo is only available under the extended profile";
    return std::nullopt;
  }
  Action a;
  a.verb = *verb;
  a.target = normalize_target(*verb, target_text);
  if (a.target.empty()) {
    why = "empty target";
    return std::nullopt;
  }
  return a;
}

}  // namespace detail

// Parses a plan from free-form text containing JSON. Accepts either a bare
// top-level array of actions or the first balanced JSON object with a "plan"
// key, anywhere in the text (models wrap answers in prose).
inline ParseResult parse_plan_json(std::string_view text, Profile profile = Profile::Strict) {
  Json plan_value;
  bool found = false;
  size_t found_at = 0;

  std::string trimmed = trim(text);
  if (!trimmed.empty() && trimmed.front() == '[') {
    Json whole = Json::parse(trimmed, nullptr, false);
    if (!whole.is_discarded()) {
      plan_value = std::move(whole);
      found = true;
    }
  }
  if (!found) {
    for (size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '{') continue;
      size_t end = detail::balanced_end(text, i);
      if (end == std::string_view::npos) continue;
      Json candidate = Json::parse(text.substr(i, end - i + 1), nullptr, false);
      if (candidate.is_discarded() || !candidate.is_object()) continue;
      if (!candidate.contains("plan")) continue;
      plan_value = candidate.at("plan");
      found = true;
      found_at = i;
      break;
    }
  }
  if (!found) {
    return ParseResult::failure(
        Verdict::malformed("no JSON plan found in response (byte offset given)", 0));
  }
  if (!plan_value.is_array()) {
    return ParseResult::failure(Verdict::malformed(
        "\"plan\" must be an array (byte offset given)", found_at));
  }

  Plan plan;
  plan.profile = profile;
  for (size_t idx = 0; idx < plan_value.size(); ++idx) {
    const Json& e = plan_value[idx];
    if (e.is_string()) {
      std::string why;
      auto a = detail::parse_action_atom(e.get<std::string>(), profile, why);
      if (!a) {
        return ParseResult::failure(Verdict::malformed(
            "plan entry " + std::to_string(idx) + ": " + why + " (element index given)", idx));
      }
      plan.actions.push_back(std::move(*a));
      continue;
    }
    if (!e.is_object()) {
      return ParseResult::failure(Verdict::malformed(
          "plan entry " + std::to_string(idx) +
              " must be an object or a string (element index given)",
          idx));
    }
    if (!e.contains("action") || !e.at("action").is_string() || !e.contains("target") ||
        !e.at("target").is_string()) {
      return ParseResult::failure(Verdict::malformed(
          "plan entry " + std::to_string(idx) +
              " needs string fields \"action\" and \"target\" (element index given)",
          idx));
    }
    std::string verb_text = trim(e.at("action").get<std::string>());
    Action a;
    if (auto verb = verb_from_string(verb_text)) {
      if (*verb == Verb::GoTo && profile == Profile::Strict) {
        return ParseResult::failure(Verdict::malformed(
            "plan entry " + std::to_string(idx) +
                ": GoTo is only available under the extended profile (element index given)",
            idx));
      }
      a.verb = *verb;
    } else {
      a.verb = Verb::Undefined;
      a.raw_verb = verb_text;
    }
    a.target = detail::normalize_target(a.verb, e.at("target").get<std::string>());
    if (a.target.empty()) {
      return ParseResult::failure(Verdict::malformed(
          "plan entry " + std::to_string(idx) + " has an empty target (element index given)",
          idx));
    }
    plan.actions.push_back(std::move(a));
  }
  return ParseResult::success(std::move(plan));
}

// Parses the newline-separated "Verb(Target)" format. Blank lines are skipped;
// anything else that is not a known action atom is malformed, reported with
// its 1-based line number.
inline ParseResult parse_plan_lines(std::string_view text, Profile profile = Profile::Strict) {
  Plan plan;
  plan.profile = profile;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    std::string s = trim(line);
    if (!s.empty()) {
      std::string why;
      auto a = detail::parse_action_atom(s, profile, why);
      if (!a) {
        return ParseResult::failure(Verdict::malformed(
            "line " + std::to_string(line_no) + ": " + why + " (line number given)", line_no));
      }
      plan.actions.push_back(std::move(*a));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return ParseResult::success(std::move(plan));
}

enum class PlanFormat { Json, Lines };

inline std::string serialize_plan(const Plan& plan, PlanFormat format) {
  if (format == PlanFormat::Lines) {
    std::string out;
    for (const Action& a : plan.actions) {
      out += a.display();
      out += '\n';
    }
    return out;
  }
  Json j;
  j["plan"] = Json::array();
  for (const Action& a : plan.actions) {
    Json aj;
    aj["action"] = a.verb == Verb::Undefined ? a.raw_verb : to_string(a.verb);
    aj["target"] = a.target;
    j["plan"].push_back(std::move(aj));
  }
  return j.dump();
}

}  // namespace mapnav
