#include "mogplan/env/desktop.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mogplan/core/error.hpp"

namespace mogplan::env {

namespace {

struct EffectSpec {
  EffectKind kind;
  std::string_view verb;
  int min_args;
  int max_args;
};

constexpr EffectSpec kEffects[] = {
    {EffectKind::Toggle, "toggle", 1, 1},
    {EffectKind::Set, "set", 2, 2},
    {EffectKind::Show, "show", 1, 1},
    {EffectKind::Hide, "hide", 1, 1},
    {EffectKind::Enable, "enable", 1, 1},
    {EffectKind::Disable, "disable", 1, 1},
    {EffectKind::Relabel, "relabel", 2, 2},
    {EffectKind::SetField, "set-field", 2, 2},
    {EffectKind::Focus, "focus", 1, 1},
    {EffectKind::Style, "style", 1, 1},
    {EffectKind::Unstyle, "unstyle", 1, 1},
    {EffectKind::ClearSelection, "clear-selection", 0, 0},
    {EffectKind::Copy, "copy", 0, 0},
    {EffectKind::Paste, "paste", 1, 1},
    {EffectKind::Dismiss, "dismiss", 0, 1},
    {EffectKind::Popup, "popup", 1, 1},
    {EffectKind::ResizeColumn, "resize-column", 3, 3},
    {EffectKind::ResizeRow, "resize-row", 3, 3},
    {EffectKind::SelectSheet, "select-sheet", 1, 1},
};

const EffectSpec& spec_for(EffectKind kind) {
  for (const auto& s : kEffects)
    if (s.kind == kind) return s;
  throw Error(ErrorKind::InvalidTask, "unknown effect kind");
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidTask, what); }

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::string word;
    if (text[i] == '"') {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          word.push_back(text[i + 1]);
          i += 2;
        } else if (text[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          word.push_back(text[i++]);
        }
      }
      if (!closed) invalid("unterminated quote in effect \"" + std::string(text) + "\"");
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
        word.push_back(text[i++]);
    }
    words.push_back(std::move(word));
  }
  return words;
}

bool needs_quotes(const std::string& s) {
  return s.empty() || std::any_of(s.begin(), s.end(), [](char c) {
           return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\\';
         });
}

int parse_int_arg(const std::string& text, const std::string& effect) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    invalid("effect \"" + effect + "\" expects an integer, got \"" + text + "\"");
  }
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Button: return "button";
    case ElementKind::MenuItem: return "menu-item";
    case ElementKind::TextField: return "text-field";
    case ElementKind::Tab: return "tab";
    case ElementKind::Icon: return "icon";
    case ElementKind::ListItem: return "list-item";
  }
  return "button";
}

std::optional<ElementKind> element_kind_from_string(std::string_view name) {
  for (auto kind : {ElementKind::Button, ElementKind::MenuItem, ElementKind::TextField,
                    ElementKind::Tab, ElementKind::Icon, ElementKind::ListItem})
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

Effect parse_effect(std::string_view text) {
  auto words = split_words(text);
  if (words.empty()) invalid("empty effect");
  for (const auto& s : kEffects) {
    if (s.verb != words.front()) continue;
    const int nargs = static_cast<int>(words.size()) - 1;
    if (nargs < s.min_args || nargs > s.max_args)
      invalid("effect \"" + std::string(text) + "\" has the wrong number of arguments");
    Effect e{s.kind, {words.begin() + 1, words.end()}};
    if (e.kind == EffectKind::Set && e.args[1] != "true" && e.args[1] != "false")
      invalid("effect \"" + std::string(text) + "\" expects true or false");
    if (e.kind == EffectKind::ResizeColumn || e.kind == EffectKind::ResizeRow) {
      parse_int_arg(e.args[1], std::string(text));
      if (parse_int_arg(e.args[2], std::string(text)) < 1)
        invalid("effect \"" + std::string(text) + "\" needs a positive size");
    }
    return e;
  }
  invalid("unknown effect verb \"" + words.front() + "\"");
}

std::string to_string(const Effect& effect) {
  std::string out(spec_for(effect.kind).verb);
  for (const auto& a : effect.args) {
    out.push_back(' ');
    if (needs_quotes(a)) {
      out.push_back('"');
      for (char c : a) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('"');
    } else {
      out += a;
    }
  }
  return out;
}

const ElementState* AppState::find_element(std::string_view element_id) const {
  for (const auto& e : elements)
    if (e.element.id == element_id) return &e;
  return nullptr;
}

ElementState* AppState::find_element(std::string_view element_id) {
  for (auto& e : elements)
    if (e.element.id == element_id) return &e;
  return nullptr;
}

const AppState& DesktopState::focused() const {
  if (auto* app = find_app(focused_app)) return *app;
  throw Error(ErrorKind::UnknownApp, "focused application \"" + focused_app + "\" does not exist");
}

AppState& DesktopState::focused() {
  return const_cast<AppState&>(static_cast<const DesktopState&>(*this).focused());
}

const AppState* DesktopState::find_app(std::string_view id_or_name) const {
  for (const auto& a : apps)
    if (a.id == id_or_name) return &a;
  for (const auto& a : apps)
    if (a.name == id_or_name) return &a;
  return nullptr;
}

AppState* DesktopState::find_app(std::string_view id_or_name) {
  return const_cast<AppState*>(static_cast<const DesktopState&>(*this).find_app(id_or_name));
}

void DesktopState::validate() const {
  if (screen.width < 1 || screen.height < 1) invalid("screen size must be positive");
  if (apps.empty()) invalid("at least one application is required");
  if (!find_app(focused_app)) invalid("focused application \"" + focused_app + "\" does not exist");

  std::set<std::string> app_ids;
  std::set<std::string> element_ids;
  std::set<std::string> sheet_names;
  auto check_element = [&](const ElementState& e, const std::string& owner) {
    if (e.element.id.empty()) invalid("element in " + owner + " has an empty id");
    if (!element_ids.insert(e.element.id).second)
      invalid("duplicate element id \"" + e.element.id + "\"");
    if (!e.element.bbox.within(screen) || e.element.bbox.width < 1 || e.element.bbox.height < 1)
      invalid("element \"" + e.element.id + "\" lies outside the screen");
  };
  for (const auto& app : apps) {
    if (app.id.empty()) invalid("application with empty id");
    if (!app_ids.insert(app.id).second) invalid("duplicate application id \"" + app.id + "\"");
    for (const auto& e : app.elements) check_element(e, app.id);
    if (app.document) {
      const auto& d = *app.document;
      if (!element_ids.insert(d.element_id).second)
        invalid("duplicate element id \"" + d.element_id + "\"");
      if (!d.layout.area.within(screen)) invalid("document of \"" + app.id + "\" lies outside the screen");
      if (d.layout.char_width < 1 || d.layout.char_height < 1 || d.layout.columns() < 1 ||
          d.layout.visible_rows() < 1)
        invalid("document area of \"" + app.id + "\" is too small for its character size");
    }
    if (app.sheet) {
      const auto& s = *app.sheet;
      if (!s.layout.area.within(screen)) invalid("spreadsheet of \"" + app.id + "\" lies outside the screen");
      if (!s.workbook.has_sheet(s.active_sheet))
        invalid("active sheet \"" + s.active_sheet + "\" does not exist in \"" + app.id + "\"");
      for (const auto& name : s.workbook.sheet_names()) sheet_names.insert(name);
    }
  }
  for (const auto& p : popups)
    for (const auto& e : p.elements) check_element(e, "popup " + p.name);
  for (const auto& [name, p] : popup_library)
    for (const auto& e : p.elements) check_element(e, "popup " + name);

  auto check_effects = [&](const std::vector<Effect>& effects, const std::string& where) {
    for (const auto& fx : effects) {
      switch (fx.kind) {
        case EffectKind::Show:
        case EffectKind::Hide:
        case EffectKind::Enable:
        case EffectKind::Disable:
        case EffectKind::Relabel:
        case EffectKind::SetField:
        case EffectKind::Paste:
          if (!element_ids.count(fx.args[0]))
            invalid(where + ": effect \"" + to_string(fx) + "\" names an unknown element");
          break;
        case EffectKind::Focus:
          if (!find_app(fx.args[0]))
            invalid(where + ": effect \"" + to_string(fx) + "\" names an unknown application");
          break;
        case EffectKind::Popup:
          if (!popup_library.count(fx.args[0]))
            invalid(where + ": effect \"" + to_string(fx) + "\" names an unknown popup");
          break;
        case EffectKind::ResizeColumn:
        case EffectKind::ResizeRow:
        case EffectKind::SelectSheet:
          if (!sheet_names.count(fx.args[0]))
            invalid(where + ": effect \"" + to_string(fx) + "\" names an unknown sheet");
          break;
        default:
          break;
      }
    }
  };
  auto check_element_effects = [&](const ElementState& e) {
    check_effects(e.on_click, e.element.id);
    check_effects(e.on_right_click, e.element.id);
    check_effects(e.on_enter, e.element.id);
  };
  for (const auto& app : apps) {
    for (const auto& e : app.elements) check_element_effects(e);
    for (const auto& [combo, fx] : app.keybindings) check_effects(fx, app.id + " keybinding " + combo);
  }
  for (const auto& p : popups)
    for (const auto& e : p.elements) check_element_effects(e);
  for (const auto& [_, p] : popup_library)
    for (const auto& e : p.elements) check_element_effects(e);
  for (const auto& ev : schedule) {
    if (!find_app(ev.app_id)) invalid("scheduled event names unknown application \"" + ev.app_id + "\"");
    if (ev.at_step < 1) invalid("scheduled events fire at step 1 or later");
    check_effects(ev.effects, "event at step " + std::to_string(ev.at_step));
  }
}

std::string normalize_key_combo(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out.push_back('+');
    for (char c : k) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace mogplan::env
