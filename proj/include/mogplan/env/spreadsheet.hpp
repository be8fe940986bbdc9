#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mogplan/env/geometry.hpp"

namespace mogplan::env {

enum class CellKind { Empty, Text, Number, Formula };

/// Formulas are stored verbatim and never evaluated.
CellKind classify_cell(const std::string& raw);

struct Sheet {
  // Keyed by (row, column), both 0-based. Absent cells read as empty.
  std::map<std::pair<int, int>, std::string> cells;
  std::map<int, int> row_heights;
  std::map<int, int> column_widths;
  int default_row_height = 24;
  int default_column_width = 100;

  int row_height(int row) const;
  int column_width(int column) const;

  bool operator==(const Sheet&) const = default;
};

class Spreadsheet {
 public:
  Spreadsheet() = default;

  bool has_sheet(const std::string& name) const { return sheets_.count(name) != 0; }
  void add_sheet(const std::string& name, Sheet sheet = {});
  std::vector<std::string> sheet_names() const;

  const Sheet& sheet(const std::string& name) const;
  Sheet& sheet(const std::string& name);

  std::string get(const std::string& sheet, int column, int row) const;
  // Writing an empty value deletes the entry.
  void set(const std::string& sheet, int column, int row, const std::string& value);

  void resize_column(const std::string& sheet, int column, int width);
  void resize_row(const std::string& sheet, int row, int height);

  bool operator==(const Spreadsheet&) const = default;

 private:
  std::map<std::string, Sheet> sheets_;
};

struct CellRef {
  int column = 0;
  int row = 0;
  Rect box;
};

/// Viewport over a spreadsheet: a header row with column letters, a header column with row
/// numbers, then only fully visible cells starting at the scroll offsets.
struct SheetLayout {
  Rect area;
  int header_width = 40;
  int header_height = 24;
  int char_width = 8;
  int char_height = 16;
  int row_offset = 0;
  int column_offset = 0;

  bool operator==(const SheetLayout&) const = default;
};

struct SheetGrid {
  std::vector<std::pair<int, Rect>> columns;  // column index, header-aligned strip
  std::vector<std::pair<int, Rect>> rows;
  std::vector<CellRef> cells;
};

SheetGrid layout_sheet(const Sheet& sheet, const SheetLayout& layout);
std::optional<CellRef> cell_at(const Sheet& sheet, const SheetLayout& layout, Point p);

}  // namespace mogplan::env
