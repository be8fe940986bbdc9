#include <algorithm>
#include <map>
#include <sstream>

#include "mogplan/core/utf8.hpp"
#include "mogplan/env/observation.hpp"
#include "mogplan/grounding/a1.hpp"

namespace mogplan::env {

namespace {

ScreenElement resolve(const ElementState& e, const AppState* app) {
  ScreenElement out = e.element;
  if (!e.flag.empty() && app) {
    auto it = app->flags.find(e.flag);
    out.checked = it != app->flags.end() && it->second;
  }
  return out;
}

void place_text(std::vector<CharCell>& grid, const std::string& text, const Rect& cell, int cw, int ch) {
  const int y = cell.y + std::max(0, (cell.height - ch) / 2);
  if (y + ch > cell.bottom()) return;
  int x = cell.x + 2;
  for (char32_t c : utf8::decode(text)) {
    if (x + cw > cell.right() - 1) break;
    grid.push_back(CharCell{c, Rect{x, y, cw, ch}});
    x += cw;
  }
}

void render_sheet(const SheetView& view, std::vector<CharCell>& grid) {
  const Sheet& sheet = view.workbook.sheet(view.active_sheet);
  const SheetLayout& lay = view.layout;
  const auto g = layout_sheet(sheet, lay);
  const Rect header_row{lay.area.x, lay.area.y, lay.area.width, lay.header_height};
  for (const auto& [col, strip] : g.columns)
    place_text(grid, grounding::column_label(col), Rect{strip.x, header_row.y, strip.width, header_row.height},
               lay.char_width, lay.char_height);
  for (const auto& [row, strip] : g.rows) {
    place_text(grid, std::to_string(row + 1), Rect{lay.area.x, strip.y, lay.header_width, strip.height},
               lay.char_width, lay.char_height);
    for (const auto& cell : g.cells) {
      if (cell.row != row) continue;
      auto it = sheet.cells.find({cell.row, cell.column});
      if (it != sheet.cells.end()) place_text(grid, it->second, cell.box, lay.char_width, lay.char_height);
    }
  }
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string sheet_tab_id(const std::string& app_id, const std::string& sheet) {
  return app_id + ":sheet:" + sheet;
}

Observation render(const DesktopState& state) {
  Observation obs;
  obs.step_index = state.step_index;
  obs.screen_size = state.screen;
  const AppState& app = state.focused();
  obs.focused_app = app.id;
  obs.focused_app_name = app.name;

  if (app.document) {
    const auto& d = *app.document;
    obs.elements.push_back(ScreenElement{d.element_id, d.label, ElementKind::TextField, d.layout.area,
                                         true, app.id, {}, std::nullopt});
  }
  for (const auto& e : app.elements)
    if (e.visible) obs.elements.push_back(resolve(e, &app));
  if (app.sheet) {
    // Tabs run along the bottom edge of the sheet area.
    const auto& s = *app.sheet;
    int x = s.layout.area.x;
    const int y = s.layout.area.bottom() - s.layout.header_height;
    for (const auto& name : s.workbook.sheet_names()) {
      const int w = std::max(60, static_cast<int>(name.size()) * s.layout.char_width + 16);
      ScreenElement tab{sheet_tab_id(app.id, name), name, ElementKind::Tab, Rect{x, y, w, s.layout.header_height},
                        true, app.id, {}, name == s.active_sheet};
      if (tab.bbox.within(state.screen)) obs.elements.push_back(tab);
      x += w;
    }
  }
  for (const auto& p : state.popups)
    for (const auto& e : p.elements)
      if (e.visible) obs.elements.push_back(resolve(e, nullptr));

  if (app.document) {
    for (const auto& c : visible_chars(app.document->document, app.document->layout))
      obs.char_grid.push_back(CharCell{c.ch, c.box});
  }
  if (app.sheet) render_sheet(*app.sheet, obs.char_grid);
  return obs;
}

const ScreenElement* element_at(const Observation& obs, Point p) {
  for (auto it = obs.elements.rbegin(); it != obs.elements.rend(); ++it)
    if (it->bbox.contains(p)) return &*it;
  return nullptr;
}

std::string reading_order_text(const std::vector<CharCell>& grid) {
  std::vector<const CharCell*> cells;
  cells.reserve(grid.size());
  for (const auto& c : grid) cells.push_back(&c);
  std::stable_sort(cells.begin(), cells.end(), [](const CharCell* a, const CharCell* b) {
    if (a->box.y != b->box.y) return a->box.y < b->box.y;
    return a->box.x < b->box.x;
  });
  std::u32string out;
  for (const auto* c : cells) out.push_back(c->ch);
  return utf8::encode(out);
}

std::string layout_text(const std::vector<CharCell>& grid) {
  std::map<int, std::vector<const CharCell*>> lines;
  for (const auto& c : grid) lines[c.box.y].push_back(&c);
  std::string out;
  bool first_line = true;
  for (auto& [y, cells] : lines) {
    std::stable_sort(cells.begin(), cells.end(),
                     [](const CharCell* a, const CharCell* b) { return a->box.x < b->box.x; });
    if (!first_line) out.push_back('\n');
    first_line = false;
    const CharCell* prev = nullptr;
    for (const auto* c : cells) {
      if (prev && c->box.x > prev->box.right()) out.push_back('\t');
      if (c->ch != U'\n') out += utf8::encode(c->ch);
      prev = c;
    }
  }
  return out;
}

std::string observation_digest(const Observation& obs, std::size_t limit) {
  std::ostringstream os;
  os << "Screen: " << obs.screen_size.width << "x" << obs.screen_size.height << "\n";
  os << "Focused application: " << obs.focused_app_name << " (" << obs.focused_app << ")\n";
  os << "Step: " << obs.step_index << "\n";
  os << "Elements:\n";
  std::vector<const ScreenElement*> ordered;
  for (const auto& e : obs.elements) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ScreenElement* a, const ScreenElement* b) {
    if (a->bbox.y != b->bbox.y) return a->bbox.y < b->bbox.y;
    return a->bbox.x < b->bbox.x;
  });
  for (const auto* e : ordered) {
    os << "- [" << e->id << "] " << to_string(e->kind) << " \"" << escape(e->label) << "\" at (" << e->bbox.x
       << "," << e->bbox.y << "," << e->bbox.width << "," << e->bbox.height << ")";
    if (e->kind == ElementKind::TextField) os << " value=\"" << escape(e->value) << "\"";
    if (e->checked) os << " checked=" << (*e->checked ? "on" : "off");
    if (!e->enabled) os << " disabled";
    os << "\n";
  }
  os << "Text:\n" << layout_text(obs.char_grid) << "\n";
  std::string digest = os.str();
  if (digest.size() > limit) {
    digest.resize(limit);
    digest += "\n[truncated]\n";
  }
  return digest;
}

}  // namespace mogplan::env
