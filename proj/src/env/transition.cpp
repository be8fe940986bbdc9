#include "mogplan/env/transition.hpp"

#include <algorithm>

#include "mogplan/core/error.hpp"
#include "mogplan/core/utf8.hpp"
#include "mogplan/env/observation.hpp"

namespace mogplan::env {

namespace {

struct ElementRef {
  ElementState* state = nullptr;
  std::string app_id;  // owning application, empty for popups
  std::string popup;   // owning popup name
};

ElementRef find_anywhere(DesktopState& state, const std::string& id) {
  for (auto& app : state.apps)
    if (auto* e = app.find_element(id)) return {e, app.id, {}};
  for (auto& p : state.popups)
    for (auto& e : p.elements)
      if (e.element.id == id) return {&e, {}, p.name};
  return {};
}

AppState& app_for(DesktopState& state, const std::string& app_id) {
  if (auto* app = state.find_app(app_id)) return *app;
  return state.focused();
}

void run_effect(DesktopState& state, const std::string& app_id, const Effect& fx, const std::string& popup) {
  auto element = [&](const std::string& id) -> ElementState* { return find_anywhere(state, id).state; };
  switch (fx.kind) {
    case EffectKind::Toggle: {
      auto& flags = app_for(state, app_id).flags;
      flags[fx.args[0]] = !flags[fx.args[0]];
      break;
    }
    case EffectKind::Set:
      app_for(state, app_id).flags[fx.args[0]] = fx.args[1] == "true";
      break;
    case EffectKind::Show:
      if (auto* e = element(fx.args[0])) e->visible = true;
      break;
    case EffectKind::Hide:
      if (auto* e = element(fx.args[0])) e->visible = false;
      break;
    case EffectKind::Enable:
      if (auto* e = element(fx.args[0])) e->element.enabled = true;
      break;
    case EffectKind::Disable:
      if (auto* e = element(fx.args[0])) e->element.enabled = false;
      break;
    case EffectKind::Relabel:
      if (auto* e = element(fx.args[0])) e->element.label = fx.args[1];
      break;
    case EffectKind::SetField:
      if (auto* e = element(fx.args[0])) e->element.value = fx.args[1];
      break;
    case EffectKind::Focus:
      if (auto* app = state.find_app(fx.args[0])) state.focused_app = app->id;
      break;
    case EffectKind::Style:
    case EffectKind::Unstyle:
    case EffectKind::ClearSelection:
    case EffectKind::Copy: {
      auto& app = app_for(state, app_id);
      if (!app.document) break;
      auto& doc = app.document->document;
      if (fx.kind == EffectKind::Style) doc.add_attr_to_selection(fx.args[0]);
      if (fx.kind == EffectKind::Unstyle) doc.remove_attr_from_selection(fx.args[0]);
      if (fx.kind == EffectKind::ClearSelection) doc.clear_selection();
      if (fx.kind == EffectKind::Copy && doc.has_selection()) state.clipboard = doc.selected_text();
      break;
    }
    case EffectKind::Paste:
      if (auto* e = element(fx.args[0])) e->element.value += state.clipboard;
      break;
    case EffectKind::Dismiss: {
      const std::string name = fx.args.empty() ? popup : fx.args[0];
      auto it = std::find_if(state.popups.begin(), state.popups.end(),
                             [&](const Popup& p) { return p.name == name; });
      if (it != state.popups.end()) state.popups.erase(it);
      break;
    }
    case EffectKind::Popup: {
      auto lib = state.popup_library.find(fx.args[0]);
      const bool shown = std::any_of(state.popups.begin(), state.popups.end(),
                                     [&](const Popup& p) { return p.name == fx.args[0]; });
      if (lib != state.popup_library.end() && !shown) state.popups.push_back(lib->second);
      break;
    }
    case EffectKind::ResizeColumn:
    case EffectKind::ResizeRow:
    case EffectKind::SelectSheet: {
      // Sheet names are resolved against the context app first, then any app holding the sheet.
      SheetView* view = nullptr;
      auto& ctx = app_for(state, app_id);
      if (ctx.sheet && ctx.sheet->workbook.has_sheet(fx.args[0])) view = &*ctx.sheet;
      for (auto& a : state.apps)
        if (!view && a.sheet && a.sheet->workbook.has_sheet(fx.args[0])) view = &*a.sheet;
      if (!view) break;
      if (fx.kind == EffectKind::SelectSheet) {
        view->active_sheet = fx.args[0];
      } else {
        const int index = std::stoi(fx.args[1]);
        const int size = std::stoi(fx.args[2]);
        if (index < 0) break;
        if (fx.kind == EffectKind::ResizeColumn)
          view->workbook.resize_column(fx.args[0], index, size);
        else
          view->workbook.resize_row(fx.args[0], index, size);
      }
      break;
    }
  }
}

void check_point(const DesktopState& state, Point p) {
  if (!in_screen(p, state.screen))
    throw Error(ErrorKind::OutOfBounds, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                            ") lies outside the " + std::to_string(state.screen.width) + "x" +
                                            std::to_string(state.screen.height) + " screen");
}

// Index into the visible characters of the focused document, or npos.
std::size_t char_index_at(const std::vector<LaidOutChar>& chars, Point p) {
  for (std::size_t i = 0; i < chars.size(); ++i)
    if (chars[i].box.contains(p)) return i;
  return std::string::npos;
}

void select_span(DesktopState& state, Point start, Point end) {
  auto& app = state.focused();
  if (!app.document) return;
  auto& view = *app.document;
  const auto chars = visible_chars(view.document, view.layout);
  const std::size_t i = char_index_at(chars, start);
  const std::size_t j = char_index_at(chars, end);
  if (i == std::string::npos || j == std::string::npos || i > j) return;
  view.document.select(chars[i].token, chars[j].token);
}

void click_document(DocumentView& view, Point p, int num_clicks) {
  auto& doc = view.document;
  if (num_clicks == 1) {
    doc.clear_selection();
    return;
  }
  const auto chars = visible_chars(doc, view.layout);
  const std::size_t i = char_index_at(chars, p);
  if (i == std::string::npos) {
    doc.clear_selection();
    return;
  }
  const std::size_t token = chars[i].token;
  if (num_clicks == 2) {
    if (doc.tokens()[token].kind == TokenKind::Word)
      doc.select(token, token);
    else
      doc.clear_selection();
    return;
  }
  std::size_t first = token;
  std::size_t last = token;
  const auto& tokens = doc.tokens();
  if (tokens[token].kind == TokenKind::Newline) {
    doc.clear_selection();
    return;
  }
  while (first > 0 && tokens[first - 1].kind != TokenKind::Newline) --first;
  while (last + 1 < tokens.size() && tokens[last + 1].kind != TokenKind::Newline) ++last;
  doc.select(first, last);
}

void apply_click(DesktopState& state, const actions::Click& a, Point p) {
  const Observation obs = render(state);
  const ScreenElement* hit = element_at(obs, p);
  if (!hit || !hit->enabled) return;
  AppState& app = state.focused();
  if (app.document && hit->id == app.document->element_id) {
    if (a.button_type == "left") click_document(*app.document, p, a.num_clicks);
    return;
  }
  if (app.sheet && hit->kind == ElementKind::Tab) {
    for (const auto& name : app.sheet->workbook.sheet_names())
      if (hit->id == sheet_tab_id(app.id, name)) {
        app.sheet->active_sheet = name;
        return;
      }
  }
  const ElementRef ref = find_anywhere(state, hit->id);
  if (!ref.state) return;
  const auto effects = a.button_type == "right" ? ref.state->on_right_click
                       : a.button_type == "left" ? ref.state->on_click
                                                 : std::vector<Effect>{};
  run_effects(state, ref.app_id.empty() ? app.id : ref.app_id, effects, ref.popup);
}

void apply_type(DesktopState& state, const actions::Type& a, Point p) {
  const Observation obs = render(state);
  const ScreenElement* hit = element_at(obs, p);
  AppState& app = state.focused();
  if (hit && !hit->enabled) return;
  if (hit && app.document && hit->id == app.document->element_id) {
    auto& doc = app.document->document;
    std::u32string text = utf8::decode(a.text);
    if (a.enter) text.push_back(U'\n');
    if (doc.has_selection()) {
      const auto [first, last] = doc.selection_range();
      doc.replace(first, last + 1, text);
    } else if (a.overwrite) {
      doc.set_text(utf8::encode(text));
    } else {
      doc.append(text);
    }
    return;
  }
  if (app.sheet && app.sheet->layout.area.contains(p) && (!hit || hit->kind != ElementKind::Tab)) {
    auto& view = *app.sheet;
    if (auto cell = cell_at(view.workbook.sheet(view.active_sheet), view.layout, p)) {
      const std::string old = view.workbook.get(view.active_sheet, cell->column, cell->row);
      view.workbook.set(view.active_sheet, cell->column, cell->row, a.overwrite ? a.text : old + a.text);
    }
    return;
  }
  if (!hit || hit->kind != ElementKind::TextField) return;
  const ElementRef ref = find_anywhere(state, hit->id);
  if (!ref.state) return;
  auto& value = ref.state->element.value;
  value = a.overwrite ? a.text : value + a.text;
  if (a.enter) run_effects(state, ref.app_id.empty() ? app.id : ref.app_id, ref.state->on_enter, ref.popup);
}

void apply_scroll(DesktopState& state, const actions::Scroll& a, Point p) {
  AppState& app = state.focused();
  if (app.document && app.document->layout.area.contains(p)) {
    auto& view = *app.document;
    const int max_rows = std::max(0, total_rows(view.document, view.layout) - view.layout.visible_rows());
    if (!a.shift) view.layout.scroll_rows = std::clamp(view.layout.scroll_rows - a.clicks, 0, max_rows);
    return;
  }
  if (app.sheet && app.sheet->layout.area.contains(p)) {
    auto& lay = app.sheet->layout;
    constexpr int kMaxOffset = 1'000'000;
    if (a.shift)
      lay.column_offset = std::clamp(lay.column_offset - a.clicks, 0, kMaxOffset);
    else
      lay.row_offset = std::clamp(lay.row_offset - a.clicks, 0, kMaxOffset);
  }
}

void press_combo(DesktopState& state, const std::vector<std::string>& keys) {
  AppState& app = state.focused();
  auto it = app.keybindings.find(normalize_key_combo(keys));
  if (it == app.keybindings.end()) return;
  const auto effects = it->second;
  run_effects(state, app.id, effects);
}

void apply_drag(DesktopState& state, Point from, Point to) {
  const Observation obs = render(state);
  const ScreenElement* src = element_at(obs, from);
  const ScreenElement* dst = element_at(obs, to);
  if (!src || !dst || src->id == dst->id || !src->enabled) return;
  AppState& app = state.focused();
  ElementState* item = app.find_element(src->id);
  const ElementState* target = app.find_element(dst->id);
  if (!item || !target || item->element.kind != ElementKind::ListItem || item->container.empty()) return;
  std::string container;
  const ElementState* zone = nullptr;
  if (!target->drop_zone.empty()) {
    container = target->drop_zone;
    zone = target;
  } else if (target->element.kind == ElementKind::ListItem && !target->container.empty()) {
    container = target->container;
    for (const auto& e : app.elements)
      if (!e.drop_zone.empty() && e.drop_zone == container) zone = &e;
  }
  if (container.empty() || container == item->container) return;
  item->container = container;
  // Restack under the zone (or the last member of the destination list).
  Rect box = item->element.bbox;
  int next_y = zone ? zone->element.bbox.y + 4 : target->element.bbox.bottom();
  int x = zone ? zone->element.bbox.x + 4 : target->element.bbox.x;
  for (const auto& e : app.elements)
    if (&e != item && e.container == container && e.visible) next_y = std::max(next_y, e.element.bbox.bottom() + 2);
  box.x = std::clamp(x, 0, std::max(0, state.screen.width - box.width));
  box.y = std::clamp(next_y, 0, std::max(0, state.screen.height - box.height));
  item->element.bbox = box;
}

}  // namespace

void run_effects(DesktopState& state, const std::string& app_id, const std::vector<Effect>& effects,
                 const std::string& popup) {
  for (const auto& fx : effects) run_effect(state, app_id, fx, popup);
}

void advance(DesktopState& state) {
  ++state.step_index;
  const auto schedule = state.schedule;
  for (const auto& ev : schedule)
    if (ev.at_step == state.step_index) run_effects(state, ev.app_id, ev.effects);
}

DesktopState apply(const DesktopState& state, const GroundedAction& grounded) {
  for (const auto& p : grounded.points) check_point(state, p);
  if (grounded.span) {
    check_point(state, grounded.span->start);
    check_point(state, grounded.span->end);
  }
  for (const auto& [p, _] : grounded.point_writes) check_point(state, p);

  DesktopState next = state;
  const Action& action = grounded.action;
  auto point = [&](std::size_t i) -> const Point* {
    return i < grounded.points.size() ? &grounded.points[i] : nullptr;
  };

  switch (action.kind()) {
    case ActionKind::Click:
      if (auto* p = point(0)) apply_click(next, *action.get_if<actions::Click>(), *p);
      break;
    case ActionKind::Type:
      if (auto* p = point(0)) apply_type(next, *action.get_if<actions::Type>(), *p);
      break;
    case ActionKind::Scroll:
      if (auto* p = point(0)) apply_scroll(next, *action.get_if<actions::Scroll>(), *p);
      break;
    case ActionKind::Hotkey:
      press_combo(next, action.get_if<actions::Hotkey>()->keys);
      break;
    case ActionKind::HoldAndPress: {
      const auto* a = action.get_if<actions::HoldAndPress>();
      for (const auto& key : a->press_keys) {
        auto combo = a->hold_keys;
        combo.push_back(key);
        press_combo(next, combo);
      }
      break;
    }
    case ActionKind::DragAndDrop:
      if (point(0) && point(1)) apply_drag(next, *point(0), *point(1));
      break;
    case ActionKind::SwitchApplications: {
      const auto& name = action.get_if<actions::SwitchApplications>()->app_name;
      const AppState* app = next.find_app(name);
      if (!app) throw Error(ErrorKind::UnknownApp, "no application named \"" + name + "\"");
      next.focused_app = app->id;
      break;
    }
    case ActionKind::HighlightTextSpan:
      if (grounded.span) select_span(next, grounded.span->start, grounded.span->end);
      break;
    case ActionKind::SetCellValues: {
      if (!grounded.point_writes.empty()) {
        AppState& app = next.focused();
        if (!app.sheet) break;
        auto& view = *app.sheet;
        for (const auto& [p, value] : grounded.point_writes)
          if (auto cell = cell_at(view.workbook.sheet(view.active_sheet), view.layout, p))
            view.workbook.set(view.active_sheet, cell->column, cell->row, value);
        break;
      }
      AppState* app = next.find_app(grounded.app_id);
      if (!app) throw Error(ErrorKind::UnknownApp, "no application \"" + grounded.app_id + "\"");
      if (!app->sheet) throw Error(ErrorKind::UnknownSheet, "application \"" + app->id + "\" has no spreadsheet");
      for (const auto& w : grounded.cell_writes)
        if (!app->sheet->workbook.has_sheet(w.address.sheet.value_or("")))
          throw Error(ErrorKind::UnknownSheet, "no sheet \"" + w.address.sheet.value_or("") + "\"");
      for (const auto& w : grounded.cell_writes)
        app->sheet->workbook.set(*w.address.sheet, w.address.column, w.address.row, w.value);
      break;
    }
    case ActionKind::SaveToKnowledge:
    case ActionKind::Wait:
    case ActionKind::Done:
    case ActionKind::Fail:
      break;
  }
  advance(next);
  return next;
}

}  // namespace mogplan::env
