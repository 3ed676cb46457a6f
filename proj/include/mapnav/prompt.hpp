#pragma once

#include <stdexcept>
#include <string>

#include "mapnav/plan.hpp"
#include "mapnav/util.hpp"

namespace mapnav {

enum class TemplateId { Instructional, DraftPersona };

inline const char* to_string(TemplateId t) {
  return t == TemplateId::Instructional ? "instructional" : "draft_persona";
}

inline TemplateId template_from_string(std::string_view s) {
  if (s == "instructional") return TemplateId::Instructional;
  if (s == "draft_persona") return TemplateId::DraftPersona;
  throw std::invalid_argument("unknown prompt template: " + std::string(s));
}

struct PromptSpec {
  TemplateId template_id = TemplateId::Instructional;
  std::string start_room;
  std::string goal_room;
  Profile profile = Profile::Strict;  // decides which action definitions render
  bool ask_connections = false;
  std::string image_path;   // used when image_bytes is empty
  std::string image_bytes;  // raw PNG bytes, wins over the path
};

struct RenderedPrompt {
  std::string text;
  std::string image_bytes;
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

inline std::string action_definitions(Profile profile) {
  std::string out;
  out += "- ApproachDoor(x): Move in front of door x.\n";
  out += "- OpenDoor(x): Open door x.\n";
  out += "- GoThrough(x): Move through open door x to the location on the other side.\n";
  if (profile == Profile::Extended) {
    out += "- GoTo(x): Move to the adjacent room x through an open doorway.\n";
  }
  return out;
}

}  // namespace detail

inline std::string image_bytes_for(const PromptSpec& spec) {
  if (!spec.image_bytes.empty()) return spec.image_bytes;
  if (!spec.image_path.empty()) return read_file(spec.image_path);
  return "";
}

// Renders the text half of the prompt. The instructional template walks
// through: where to go, what the robot can do, how doors work, optionally a
// request to list the connections, and the output format. The persona
// template reproduces an earlier fixed wording and takes no options.
inline RenderedPrompt build_prompt(const PromptSpec& spec) {
  if (spec.start_room.empty() || spec.goal_room.empty()) {
    throw std::invalid_argument("prompt needs both a start and a goal room");
  }
  if (normalize_id(spec.start_room) == normalize_id(spec.goal_room)) {
    throw std::invalid_argument("prompt start and goal must differ");
  }

  std::string text;
  if (spec.template_id == TemplateId::DraftPersona) {
    text =
        "I am a wheeled robot that cannot go through walls. This is the floor plan of the "
        "home I am in right now. Now you are a five-time world-champion navigation agent "
        "and your task is to tell me which ordered set of rooms I should pick for the task "
        "of: What actions should the robot take to go from the {start} to the {goal} "
        "without going through walls? Do NOT choose routes that goes through walls. Skip "
        "analysis and provide your answer at the end.";
  } else {
    text =
        "You are guiding a wheeled indoor robot. The attached image is the floor plan of "
        "the building the robot is in.\n"
        "Task: drive the robot from the {start} to the {goal}.\n"
        "\n"
        "The robot understands exactly these actions:\n"
        "{actions}"
        "\n"
        "Door protocol: approach a door before opening it, and open it before driving "
        "through. Closed doors block the robot. Walls always block the robot; never "
        "route it through a wall.\n";
    if (spec.ask_connections) {
      text +=
          "\n"
          "First list every room and door connection you can identify in the map, one "
          "per line, written as \"door: room -- room\".\n";
    }
    text +=
        "\n"
        "Then answer with the final navigation plan in JSON format: a single object "
        "whose \"plan\" field is the ordered list of actions, each action an object "
        "with an \"action\" field and a \"target\" field. Output nothing after the "
        "JSON.";
  }

  detail::replace_all(text, "{start}", spec.start_room);
  detail::replace_all(text, "{goal}", spec.goal_room);
  detail::replace_all(text, "{actions}", detail::action_definitions(spec.profile));
  // Both templates are brace-free once filled (the output-format section is
  // worded without literal braces), so a leftover brace is an unfilled
  // placeholder.
  if (text.find('{') != std::string::npos) {
    throw std::logic_error("prompt template left a placeholder unfilled");
  }

  RenderedPrompt out;
  out.text = std::move(text);
  out.image_bytes = image_bytes_for(spec);
  return out;
}

// Cache identity of a prompt: text and image bytes only, so moving or
// renaming the image file does not invalidate cached transcripts.
inline std::string prompt_hash(const PromptSpec& spec) {
  RenderedPrompt r = build_prompt(spec);
  uint64_t h = fnv1a64(r.text);
  h = mix64(h, fnv1a64(r.image_bytes));
  h = mix64(h, static_cast<uint64_t>(spec.template_id));
  return hex64(h);
}

}  // namespace mapnav
