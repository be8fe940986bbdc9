#include "mogplan/env/spreadsheet.hpp"

#include <charconv>

#include "mogplan/core/error.hpp"

namespace mogplan::env {

CellKind classify_cell(const std::string& raw) {
  if (raw.empty()) return CellKind::Empty;
  if (raw.front() == '=') return CellKind::Formula;
  double value = 0;
  const char* end = raw.data() + raw.size();
  auto [ptr, ec] = std::from_chars(raw.data(), end, value);
  if (ec == std::errc() && ptr == end) return CellKind::Number;
  return CellKind::Text;
}

int Sheet::row_height(int row) const {
  auto it = row_heights.find(row);
  return it == row_heights.end() ? default_row_height : it->second;
}

int Sheet::column_width(int column) const {
  auto it = column_widths.find(column);
  return it == column_widths.end() ? default_column_width : it->second;
}

void Spreadsheet::add_sheet(const std::string& name, Sheet sheet) { sheets_[name] = std::move(sheet); }

std::vector<std::string> Spreadsheet::sheet_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : sheets_) names.push_back(name);
  return names;
}

const Sheet& Spreadsheet::sheet(const std::string& name) const {
  auto it = sheets_.find(name);
  if (it == sheets_.end()) throw Error(ErrorKind::UnknownSheet, "no sheet named \"" + name + "\"");
  return it->second;
}

Sheet& Spreadsheet::sheet(const std::string& name) {
  auto it = sheets_.find(name);
  if (it == sheets_.end()) throw Error(ErrorKind::UnknownSheet, "no sheet named \"" + name + "\"");
  return it->second;
}

std::string Spreadsheet::get(const std::string& sheet_name, int column, int row) const {
  const auto& cells = sheet(sheet_name).cells;
  auto it = cells.find({row, column});
  return it == cells.end() ? std::string{} : it->second;
}

void Spreadsheet::set(const std::string& sheet_name, int column, int row, const std::string& value) {
  auto& cells = sheet(sheet_name).cells;
  if (value.empty())
    cells.erase({row, column});
  else
    cells[{row, column}] = value;
}

void Spreadsheet::resize_column(const std::string& sheet_name, int column, int width) {
  if (width < 1) throw Error(ErrorKind::InvalidTask, "column width must be positive");
  sheet(sheet_name).column_widths[column] = width;
}

void Spreadsheet::resize_row(const std::string& sheet_name, int row, int height) {
  if (height < 1) throw Error(ErrorKind::InvalidTask, "row height must be positive");
  sheet(sheet_name).row_heights[row] = height;
}

SheetGrid layout_sheet(const Sheet& sheet, const SheetLayout& layout) {
  SheetGrid grid;
  const Rect& a = layout.area;
  for (int col = layout.column_offset, x = a.x + layout.header_width;; ++col) {
    const int w = sheet.column_width(col);
    if (x + w > a.right()) break;
    grid.columns.emplace_back(col, Rect{x, a.y, w, a.height});
    x += w;
  }
  for (int row = layout.row_offset, y = a.y + layout.header_height;; ++row) {
    const int h = sheet.row_height(row);
    if (y + h > a.bottom()) break;
    grid.rows.emplace_back(row, Rect{a.x, y, a.width, h});
    y += h;
  }
  for (const auto& [row, rrect] : grid.rows)
    for (const auto& [col, crect] : grid.columns)
      grid.cells.push_back(CellRef{col, row, Rect{crect.x, rrect.y, crect.width, rrect.height}});
  return grid;
}

std::optional<CellRef> cell_at(const Sheet& sheet, const SheetLayout& layout, Point p) {
  if (!layout.area.contains(p)) return std::nullopt;
  for (const auto& cell : layout_sheet(sheet, layout).cells)
    if (cell.box.contains(p)) return cell;
  return std::nullopt;
}

}  // namespace mogplan::env
