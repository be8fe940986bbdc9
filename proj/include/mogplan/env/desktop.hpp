#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mogplan/env/geometry.hpp"
#include "mogplan/env/spreadsheet.hpp"
#include "mogplan/env/text_document.hpp"

namespace mogplan::env {

enum class ElementKind { Button, MenuItem, TextField, Tab, Icon, ListItem };

std::string_view to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from_string(std::string_view name);

struct ScreenElement {
  std::string id;
  std::string label;
  ElementKind kind = ElementKind::Button;
  Rect bbox;
  bool enabled = true;
  std::string app_id;
  // Contents of a text field; empty for other kinds.
  std::string value;
  // Set for elements bound to an application flag (toggles, checkboxes).
  std::optional<bool> checked;

  bool operator==(const ScreenElement&) const = default;
};

/// State mutation attached to clicks, Enter presses, keybindings and scheduled events.
/// Text form is `verb arg...` with double quotes for arguments containing spaces, e.g.
/// `toggle dim_screen` or `relabel status "Moved to Power"`.
enum class EffectKind {
  Toggle,          // toggle FLAG
  Set,             // set FLAG true|false
  Show,            // show ELEMENT
  Hide,            // hide ELEMENT
  Enable,          // enable ELEMENT
  Disable,         // disable ELEMENT
  Relabel,         // relabel ELEMENT TEXT
  SetField,        // set-field ELEMENT TEXT
  Focus,           // focus APP
  Style,           // style ATTR           (adds ATTR to the selected document tokens)
  Unstyle,         // unstyle ATTR
  ClearSelection,  // clear-selection
  Copy,            // copy                 (selected document text to the clipboard)
  Paste,           // paste ELEMENT        (clipboard appended to a text field)
  Dismiss,         // dismiss [POPUP]      (removes the popup owning the element, or POPUP)
  Popup,           // popup NAME           (shows a popup from the task's library)
  ResizeColumn,    // resize-column SHEET COLUMN WIDTH
  ResizeRow,       // resize-row SHEET ROW HEIGHT
  SelectSheet,     // select-sheet SHEET
};

struct Effect {
  EffectKind kind = EffectKind::Toggle;
  std::vector<std::string> args;

  bool operator==(const Effect&) const = default;
};

Effect parse_effect(std::string_view text);
std::string to_string(const Effect& effect);

struct ElementState {
  ScreenElement element;
  bool visible = true;
  std::string flag;       // checked state mirrors this application flag
  std::string container;  // list-item membership
  std::string drop_zone;  // dropping a list-item here moves it into this container
  std::vector<Effect> on_click;
  std::vector<Effect> on_right_click;
  std::vector<Effect> on_enter;

  bool operator==(const ElementState&) const = default;
};

struct DocumentView {
  std::string element_id;
  std::string label = "Document";
  TextDocument document;
  TextLayout layout;

  bool operator==(const DocumentView&) const = default;
};

struct SheetView {
  Spreadsheet workbook;
  std::string active_sheet;
  SheetLayout layout;

  bool operator==(const SheetView&) const = default;
};

struct AppState {
  std::string id;
  std::string name;
  std::vector<ElementState> elements;
  std::map<std::string, bool> flags;
  std::optional<DocumentView> document;
  std::optional<SheetView> sheet;
  // Key combos are lowercase names joined by '+', e.g. "ctrl+shift+s".
  std::map<std::string, std::vector<Effect>> keybindings;

  const ElementState* find_element(std::string_view element_id) const;
  ElementState* find_element(std::string_view element_id);

  bool operator==(const AppState&) const = default;
};

struct Popup {
  std::string name;
  std::vector<ElementState> elements;

  bool operator==(const Popup&) const = default;
};

/// Effects applied to `app_id` right after the action that brings step_index to `at_step`.
struct ScheduledEvent {
  int at_step = 0;
  std::string app_id;
  std::vector<Effect> effects;

  bool operator==(const ScheduledEvent&) const = default;
};

inline constexpr std::string_view kPopupAppId = "popup";

/// Full desktop snapshot. Plain value type: copies are independent, equality is structural.
struct DesktopState {
  Size screen;
  std::vector<AppState> apps;
  std::string focused_app;
  std::string clipboard;
  std::vector<Popup> popups;  // drawn above applications, last one topmost
  std::map<std::string, Popup> popup_library;
  std::vector<ScheduledEvent> schedule;
  int step_index = 0;

  const AppState& focused() const;
  AppState& focused();
  // Matches an application by id first, then by display name.
  const AppState* find_app(std::string_view id_or_name) const;
  AppState* find_app(std::string_view id_or_name);

  /// Checks structural invariants (unique ids, boxes on screen, focused app exists, effect
  /// targets exist). Throws Error(InvalidTask) describing the first violation.
  void validate() const;

  bool operator==(const DesktopState&) const = default;
};

std::string normalize_key_combo(const std::vector<std::string>& keys);

}  // namespace mogplan::env
