#include "mogplan/backend/action.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "mogplan/core/error.hpp"

namespace mogplan {

namespace {

constexpr std::array<std::string_view, 13> kNames = {
    "click", "type", "scroll", "hotkey", "hold_and_press", "drag_and_drop", "save_to_knowledge",
    "switch_applications", "highlight_text_span", "set_cell_values", "wait", "done", "fail",
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += quote(items[i]);
  }
  return out + "]";
}

std::string boolean(bool b) { return b ? "true" : "false"; }

std::string number(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, "non-finite number cannot be rendered");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct CallRenderer {
  std::string operator()(const actions::Click& a) const {
    return "click(element_description=" + quote(a.element_description) +
           ", num_clicks=" + std::to_string(a.num_clicks) + ", button_type=" + quote(a.button_type) +
           ", hold_keys=" + list(a.hold_keys) + ")";
  }
  std::string operator()(const actions::Type& a) const {
    return "type(element_description=" + quote(a.element_description) + ", text=" + quote(a.text) +
           ", overwrite=" + boolean(a.overwrite) + ", enter=" + boolean(a.enter) + ")";
  }
  std::string operator()(const actions::Scroll& a) const {
    return "scroll(element_description=" + quote(a.element_description) +
           ", clicks=" + std::to_string(a.clicks) + ", shift=" + boolean(a.shift) + ")";
  }
  std::string operator()(const actions::Hotkey& a) const { return "hotkey(keys=" + list(a.keys) + ")"; }
  std::string operator()(const actions::HoldAndPress& a) const {
    return "hold_and_press(hold_keys=" + list(a.hold_keys) + ", press_keys=" + list(a.press_keys) + ")";
  }
  std::string operator()(const actions::DragAndDrop& a) const {
    return "drag_and_drop(element_description_1=" + quote(a.element_description_1) +
           ", element_description_2=" + quote(a.element_description_2) + ", hold_keys=" + list(a.hold_keys) +
           ")";
  }
  std::string operator()(const actions::SaveToKnowledge& a) const {
    return "save_to_knowledge(text=" + quote(a.text) + ")";
  }
  std::string operator()(const actions::SwitchApplications& a) const {
    return "switch_applications(app_name=" + quote(a.app_name) + ")";
  }
  std::string operator()(const actions::HighlightTextSpan& a) const {
    return "highlight_text_span(starting_phrase=" + quote(a.starting_phrase) +
           ", ending_phrase=" + quote(a.ending_phrase) + ")";
  }
  std::string operator()(const actions::SetCellValues& a) const {
    std::string map = "{";
    for (std::size_t i = 0; i < a.cell_values.size(); ++i) {
      if (i) map += ", ";
      map += quote(a.cell_values[i].first) + ": " + quote(a.cell_values[i].second);
    }
    map += "}";
    return "set_cell_values(cell_values=" + map + ", app_name=" + quote(a.app_name) +
           ", sheet_name=" + quote(a.sheet_name) + ")";
  }
  std::string operator()(const actions::Wait& a) const { return "wait(time=" + number(a.time) + ")"; }
  std::string operator()(const actions::Done&) const { return "done()"; }
  std::string operator()(const actions::Fail&) const { return "fail()"; }
};

}  // namespace

std::string_view action_name(ActionKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<ActionKind> action_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<ActionKind>(i);
  return std::nullopt;
}

std::string Action::to_call() const { return std::visit(CallRenderer{}, value); }

std::vector<std::string> Action::element_descriptions() const {
  if (auto* a = get_if<actions::Click>()) return {a->element_description};
  if (auto* a = get_if<actions::Type>()) return {a->element_description};
  if (auto* a = get_if<actions::Scroll>()) return {a->element_description};
  if (auto* a = get_if<actions::DragAndDrop>()) return {a->element_description_1, a->element_description_2};
  return {};
}

}  // namespace mogplan
