#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace mogplan {

/// The agent's action space. Declaration order is the canonical order used everywhere
/// (variant index, routing table, documentation).
enum class ActionKind {
  Click,
  Type,
  Scroll,
  Hotkey,
  HoldAndPress,
  DragAndDrop,
  SaveToKnowledge,
  SwitchApplications,
  HighlightTextSpan,
  SetCellValues,
  Wait,
  Done,
  Fail,
};

inline constexpr std::array<ActionKind, 13> kAllActionKinds = {
    ActionKind::Click,           ActionKind::Type,
    ActionKind::Scroll,          ActionKind::Hotkey,
    ActionKind::HoldAndPress,    ActionKind::DragAndDrop,
    ActionKind::SaveToKnowledge, ActionKind::SwitchApplications,
    ActionKind::HighlightTextSpan, ActionKind::SetCellValues,
    ActionKind::Wait,            ActionKind::Done,
    ActionKind::Fail,
};

std::string_view action_name(ActionKind kind);
std::optional<ActionKind> action_kind_from_name(std::string_view name);

namespace actions {

struct Click {
  std::string element_description;
  int num_clicks = 1;
  std::string button_type = "left";
  std::vector<std::string> hold_keys;
  bool operator==(const Click&) const = default;
};

struct Type {
  std::string element_description;
  std::string text;
  bool overwrite = false;
  bool enter = false;
  bool operator==(const Type&) const = default;
};

/// Positive clicks scroll towards the top, negative towards the bottom. `shift` scrolls
/// horizontally.
struct Scroll {
  std::string element_description;
  int clicks = 0;
  bool shift = false;
  bool operator==(const Scroll&) const = default;
};

struct Hotkey {
  std::vector<std::string> keys;
  bool operator==(const Hotkey&) const = default;
};

struct HoldAndPress {
  std::vector<std::string> hold_keys;
  std::vector<std::string> press_keys;
  bool operator==(const HoldAndPress&) const = default;
};

struct DragAndDrop {
  std::string element_description_1;
  std::string element_description_2;
  std::vector<std::string> hold_keys;
  bool operator==(const DragAndDrop&) const = default;
};

struct SaveToKnowledge {
  std::string text;
  bool operator==(const SaveToKnowledge&) const = default;
};

struct SwitchApplications {
  std::string app_name;
  bool operator==(const SwitchApplications&) const = default;
};

struct HighlightTextSpan {
  std::string starting_phrase;
  std::string ending_phrase;
  bool operator==(const HighlightTextSpan&) const = default;
};

/// Keys are A1 references; source order is kept.
struct SetCellValues {
  std::vector<std::pair<std::string, std::string>> cell_values;
  std::string app_name;
  std::string sheet_name;
  bool operator==(const SetCellValues&) const = default;
};

struct Wait {
  double time = 0.0;  // seconds
  bool operator==(const Wait&) const = default;
};

struct Done {
  bool operator==(const Done&) const = default;
};

struct Fail {
  bool operator==(const Fail&) const = default;
};

}  // namespace actions

// Alternative order matches ActionKind.
using ActionVariant =
    std::variant<actions::Click, actions::Type, actions::Scroll, actions::Hotkey, actions::HoldAndPress,
                 actions::DragAndDrop, actions::SaveToKnowledge, actions::SwitchApplications,
                 actions::HighlightTextSpan, actions::SetCellValues, actions::Wait, actions::Done,
                 actions::Fail>;

struct Action {
  ActionVariant value;

  Action() : value(actions::Done{}) {}
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Action> && std::is_constructible_v<ActionVariant, T>)
  Action(T alternative) : value(std::move(alternative)) {}  // NOLINT(google-explicit-constructor)

  ActionKind kind() const { return static_cast<ActionKind>(value.index()); }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&value);
  }

  /// Canonical call syntax: every argument, in declaration order, keyword form. Parsing the
  /// result with parse_action_call yields an equal Action.
  std::string to_call() const;

  // Element descriptions the visual expert would ground, in argument order.
  std::vector<std::string> element_descriptions() const;

  bool operator==(const Action&) const = default;
};

}  // namespace mogplan
